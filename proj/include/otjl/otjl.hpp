#pragma once

#include "otjl/acquisition.hpp"
#include "otjl/adaptation.hpp"
#include "otjl/concepts.hpp"
#include "otjl/config.hpp"
#include "otjl/corpus.hpp"
#include "otjl/dataset_io.hpp"
#include "otjl/error.hpp"
#include "otjl/eval.hpp"
#include "otjl/metrics.hpp"
#include "otjl/pipeline.hpp"
#include "otjl/rng.hpp"
#include "otjl/stm.hpp"
#include "otjl/tagger.hpp"
#include "otjl/text.hpp"
#include "otjl/usersim.hpp"
