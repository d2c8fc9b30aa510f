#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "seq_counter.hpp"
#include "time.hpp"
#include "topology.hpp"

namespace rplsim {

/// DODAG Information Object. The DODAG version is constant in this model.
struct Dio {
  NodeId sender = kNoNode;
  std::uint32_t rank = 0;
  LollipopCounter dtsn;
  std::uint32_t dodag_version = 0;
};

/// DODAG Information Solicitation.
struct Dis {
  NodeId sender = kNoNode;
};

/// Destination Advertisement Object.
///
/// `trigger` is the single bit marking a DAO generated in reaction to a DTSN
/// increment; the root uses it to spot increments it did not start.
/// `parent_of_origin` is the transit information the root needs to build
/// source routes in non-storing mode.
struct Dao {
  std::uint64_t id = 0;
  NodeId origin = kNoNode;
  NodeId forwarder = kNoNode;
  NodeId parent_of_origin = kNoNode;
  bool trigger = false;
  std::vector<NodeId> hop_trail;
};

struct DataPacket {
  std::uint64_t id = 0;
  NodeId origin = kNoNode;
  NodeId forwarder = kNoNode;
  NodeId destination = kRootId;
  SimTime created_at = 0;
  std::uint32_t size_bytes = 50;
};

using Message = std::variant<Dio, Dis, Dao, DataPacket>;

inline const char* message_kind(const Message& m) {
  struct {
    const char* operator()(const Dio&) const { return "DIO"; }
    const char* operator()(const Dis&) const { return "DIS"; }
    const char* operator()(const Dao&) const { return "DAO"; }
    const char* operator()(const DataPacket&) const { return "DATA"; }
  } visitor;
  return std::visit(visitor, m);
}

/// Sender of one physical hop.
inline NodeId hop_sender(const Message& m) {
  struct {
    NodeId operator()(const Dio& d) const { return d.sender; }
    NodeId operator()(const Dis& d) const { return d.sender; }
    NodeId operator()(const Dao& d) const { return d.forwarder; }
    NodeId operator()(const DataPacket& d) const { return d.forwarder; }
  } visitor;
  return std::visit(visitor, m);
}

inline std::string join_ids(const std::vector<NodeId>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(ids[i]);
  }
  return out;
}

inline std::string node_field(NodeId id) { return id == kNoNode ? "*" : std::to_string(id); }

/// The salient fields of a message as tab-separated key=value pairs.
inline std::string message_fields(const Message& m) {
  struct {
    std::string operator()(const Dio& d) const {
      return "rank=" + std::to_string(d.rank) + "\tdtsn=" + std::to_string(d.dtsn.value()) +
             "\tversion=" + std::to_string(d.dodag_version);
    }
    std::string operator()(const Dis&) const { return "-"; }
    std::string operator()(const Dao& d) const {
      return "dao=" + std::to_string(d.id) + "\torigin=" + std::to_string(d.origin) +
             "\tparent=" + node_field(d.parent_of_origin) + "\ttrigger=" + (d.trigger ? "T" : "F") +
             "\ttrail=" + join_ids(d.hop_trail);
    }
    std::string operator()(const DataPacket& d) const {
      return "pkt=" + std::to_string(d.id) + "\torigin=" + std::to_string(d.origin) +
             "\tcreated=" + format_time(d.created_at);
    }
  } visitor;
  return std::visit(visitor, m);
}

/// One trace line for a message on the air:
/// time, TX, kind, sender, receiver ("*" for broadcast), bytes, attempt, fields.
inline std::string encode_trace(const Message& m, SimTime t, NodeId receiver = kNoNode,
                                std::uint32_t bytes = 0, int attempt = 1) {
  return format_time(t) + "\tTX\t" + message_kind(m) + "\t" + std::to_string(hop_sender(m)) +
         "\t" + node_field(receiver) + "\t" + std::to_string(bytes) + "\t" +
         std::to_string(attempt) + "\t" + message_fields(m);
}

}  // namespace rplsim
