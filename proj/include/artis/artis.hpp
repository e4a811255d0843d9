#pragma once

#include "artis/config.hpp"
#include "artis/core.hpp"
#include "artis/eval.hpp"
#include "artis/fhdof.hpp"
#include "artis/ingest.hpp"
#include "artis/optflow.hpp"
#include "artis/seqmatch.hpp"
#include "artis/synth.hpp"
#include "artis/tpdf.hpp"
