#pragma once

#include "dglab/experiment/config.hpp"
#include "dglab/experiment/experiment.hpp"
#include "dglab/experiment/observer.hpp"
#include "dglab/experiment/registry.hpp"
