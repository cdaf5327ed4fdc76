#pragma once

#include "regime_levy/bessel.hpp"
#include "regime_levy/data_ingest.hpp"
#include "regime_levy/diagnostics.hpp"
#include "regime_levy/error.hpp"
#include "regime_levy/nelder_mead.hpp"
#include "regime_levy/nig.hpp"
#include "regime_levy/nig_fit.hpp"
#include "regime_levy/portfolio_lab.hpp"
#include "regime_levy/regime_em.hpp"
#include "regime_levy/regime_model.hpp"
#include "regime_levy/report.hpp"
#include "regime_levy/stage2_fit.hpp"
