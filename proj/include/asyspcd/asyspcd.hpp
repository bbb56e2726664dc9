#pragma once

#include "asyspcd/async.hpp"
#include "asyspcd/certify.hpp"
#include "asyspcd/errors.hpp"
#include "asyspcd/experiment.hpp"
#include "asyspcd/instance.hpp"
#include "asyspcd/interleaving.hpp"
#include "asyspcd/problem.hpp"
#include "asyspcd/prox.hpp"
#include "asyspcd/report_io.hpp"
#include "asyspcd/serial.hpp"
#include "asyspcd/theory.hpp"
