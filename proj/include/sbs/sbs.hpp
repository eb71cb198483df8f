#pragma once

#include "sbs/dw_model.hpp"
#include "sbs/dynamics.hpp"
#include "sbs/expression.hpp"
#include "sbs/find_sbs.hpp"
#include "sbs/loops_moduli.hpp"
#include "sbs/quantize.hpp"
#include "sbs/sbs_structure.hpp"
#include "sbs/section.hpp"
#include "sbs/sphere.hpp"
