#pragma once

#include "dglab/models/loss_report.hpp"
#include "dglab/models/model.hpp"
#include "dglab/models/parts.hpp"
