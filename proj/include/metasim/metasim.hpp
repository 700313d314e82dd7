#pragma once

#include "metasim/common.hpp"
#include "metasim/machine/machine.hpp"
#include "metasim/metadata/plane.hpp"
#include "metasim/isa/executor.hpp"
#include "metasim/os/os.hpp"
#include "metasim/clients/bounds.hpp"
#include "metasim/clients/graph_prefetch.hpp"
#include "metasim/clients/null_client.hpp"
#include "metasim/clients/rap.hpp"
#include "metasim/workloads/generators.hpp"
#include "metasim/workloads/instrument.hpp"
#include "metasim/workloads/trace_io.hpp"
#include "metasim/workloads/trace_spec.hpp"
#include "metasim/sim/simulator.hpp"
#include "metasim/harness/config_io.hpp"
#include "metasim/harness/experiments.hpp"
#include "metasim/harness/csv.hpp"
