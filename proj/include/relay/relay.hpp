#pragma once

#include "relay/density.hpp"
#include "relay/errors.hpp"
#include "relay/executor.hpp"
#include "relay/expected_time.hpp"
#include "relay/io.hpp"
#include "relay/mle.hpp"
#include "relay/optimizer.hpp"
#include "relay/quadrature.hpp"
#include "relay/schedule.hpp"
#include "relay/subprocess.hpp"
#include "relay/timing.hpp"
#include "relay/univariate.hpp"
