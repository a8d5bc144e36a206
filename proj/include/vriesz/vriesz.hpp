#pragma once
/**
 * @file vriesz.hpp
 * @brief Everything in one include.
 */

#include "vriesz/core.hpp"
#include "vriesz/grid.hpp"
#include "vriesz/fields.hpp"
#include "vriesz/field_io.hpp"
#include "vriesz/vexp.hpp"
#include "vriesz/ball_stencil.hpp"
#include "vriesz/potentials.hpp"
#include "vriesz/content.hpp"
#include "vriesz/domains.hpp"
#include "vriesz/battery.hpp"
#include "vriesz/config.hpp"
#include "vriesz/report.hpp"
#include "vriesz/verify.hpp"
