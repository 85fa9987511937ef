#pragma once

#include "glogit/config.hpp"
#include "glogit/csv.hpp"
#include "glogit/field.hpp"
#include "glogit/graphon.hpp"
#include "glogit/grid.hpp"
#include "glogit/harness.hpp"
#include "glogit/hjb.hpp"
#include "glogit/logit.hpp"
#include "glogit/mc.hpp"
#include "glogit/scenario.hpp"
