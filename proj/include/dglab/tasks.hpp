#pragma once

#include "dglab/tasks/batching.hpp"
#include "dglab/tasks/builtin.hpp"
#include "dglab/tasks/loaders.hpp"
#include "dglab/tasks/task.hpp"
