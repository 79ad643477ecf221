#pragma once

#include "dglab/netcore/loss.hpp"
#include "dglab/netcore/mlp.hpp"
#include "dglab/netcore/optimizer.hpp"
#include "dglab/netcore/params.hpp"
#include "dglab/netcore/tensor.hpp"
