#pragma once

#include "tkl/apd.hpp"
#include "tkl/context.hpp"
#include "tkl/data.hpp"
#include "tkl/eig.hpp"
#include "tkl/exponents.hpp"
#include "tkl/fw.hpp"
#include "tkl/kernel.hpp"
#include "tkl/matrix.hpp"
#include "tkl/model.hpp"
#include "tkl/oracle.hpp"
#include "tkl/qp.hpp"
#include "tkl/trainer.hpp"
