#pragma once

#include "dglab/trainers/config.hpp"
#include "dglab/trainers/regularizers.hpp"
#include "dglab/trainers/train_loop.hpp"
#include "dglab/trainers/trainer.hpp"
