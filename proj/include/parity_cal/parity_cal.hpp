#pragma once

#include "parity_cal/decision.hpp"
#include "parity_cal/distributions.hpp"
#include "parity_cal/errors.hpp"
#include "parity_cal/metrics.hpp"
#include "parity_cal/normal.hpp"
#include "parity_cal/ons.hpp"
#include "parity_cal/platt.hpp"
#include "parity_cal/schedule.hpp"
#include "parity_cal/synthetic.hpp"
