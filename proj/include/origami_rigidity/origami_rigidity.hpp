#pragma once

#include "barjoint.hpp"
#include "consistency.hpp"
#include "derivatives.hpp"
#include "fixtures.hpp"
#include "linalg.hpp"
#include "model.hpp"
#include "report.hpp"
#include "stability.hpp"
#include "statics.hpp"
