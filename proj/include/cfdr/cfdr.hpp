#pragma once

#include <cfdr/confdist.hpp>
#include <cfdr/csv.hpp>
#include <cfdr/distkit.hpp>
#include <cfdr/ingest.hpp>
#include <cfdr/lfdr.hpp>
#include <cfdr/nfdr.hpp>
#include <cfdr/numerics.hpp>
#include <cfdr/simkit.hpp>
#include <cfdr/version.hpp>
