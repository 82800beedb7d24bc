#pragma once

#include "itertrace/errors.hpp"     // IWYU pragma: export
#include "itertrace/ingest.hpp"     // IWYU pragma: export
#include "itertrace/match.hpp"      // IWYU pragma: export
#include "itertrace/metrics.hpp"    // IWYU pragma: export
#include "itertrace/mine.hpp"       // IWYU pragma: export
#include "itertrace/pipeline.hpp"   // IWYU pragma: export
#include "itertrace/report.hpp"     // IWYU pragma: export
#include "itertrace/streams.hpp"    // IWYU pragma: export
#include "itertrace/suffix_tree.hpp" // IWYU pragma: export
#include "itertrace/synth.hpp"      // IWYU pragma: export
#include "itertrace/trace.hpp"      // IWYU pragma: export
#include "itertrace/version.hpp"    // IWYU pragma: export
