#pragma once

// Umbrella header.
#include "adversary.hpp"
#include "detection.hpp"
#include "dodag.hpp"
#include "messages.hpp"
#include "metrics.hpp"
#include "node_protocol.hpp"
#include "rng.hpp"
#include "scenario.hpp"
#include "seq_counter.hpp"
#include "sim_engine.hpp"
#include "sweep.hpp"
#include "time.hpp"
#include "topology.hpp"
#include "trace.hpp"
