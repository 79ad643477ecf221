#pragma once

#include "dglab/benchmark/aggregate.hpp"
#include "dglab/benchmark/charts.hpp"
#include "dglab/benchmark/cluster.hpp"
#include "dglab/benchmark/config.hpp"
#include "dglab/benchmark/executor.hpp"
#include "dglab/benchmark/jobs.hpp"
#include "dglab/benchmark/results.hpp"
#include "dglab/benchmark/sampling.hpp"
