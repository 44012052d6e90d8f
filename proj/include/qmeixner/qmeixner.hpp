#pragma once

// Umbrella header: the full q-Meixner Markov process toolkit.

#include "qmeixner/errors.hpp"
#include "qmeixner/markov.hpp"
#include "qmeixner/poly.hpp"
#include "qmeixner/qnum.hpp"
#include "qmeixner/recurrence.hpp"
#include "qmeixner/serialize.hpp"
#include "qmeixner/simulate.hpp"
#include "qmeixner/spectra.hpp"
#include "qmeixner/verify.hpp"
