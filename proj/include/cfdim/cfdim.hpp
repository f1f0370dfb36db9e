#pragma once

#include "cantor.hpp"
#include "cf_core.hpp"
#include "errors.hpp"
#include "growth.hpp"
#include "measure.hpp"
#include "numeric.hpp"
#include "parallel.hpp"
#include "phi.hpp"
#include "pressure.hpp"
#include "transfer_operator.hpp"
