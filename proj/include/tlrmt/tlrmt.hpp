#pragma once

// Time-lag random-matrix toolkit: panel transforms, modified lag correlation
// matrices with Wishart references, singular-value spectra and power-law
// fits, PCA global-factor estimation, GJR-GARCH(1,1) volatility modeling,
// and the synthetic-panel generator used to verify all of it.

#include "tlrmt/factor.hpp"
#include "tlrmt/garch.hpp"
#include "tlrmt/io.hpp"
#include "tlrmt/panel.hpp"
#include "tlrmt/simulate.hpp"
#include "tlrmt/spectrum.hpp"
#include "tlrmt/stats.hpp"
#include "tlrmt/xcorr.hpp"
