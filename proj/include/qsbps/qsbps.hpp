#pragma once

// Umbrella header for the search engine core. The HTTP layer lives in
// qsbps/service.hpp and is not included here.

#include "qsbps/belief.hpp"
#include "qsbps/bitmap.hpp"
#include "qsbps/corpus.hpp"
#include "qsbps/error.hpp"
#include "qsbps/evaluation.hpp"
#include "qsbps/model_io.hpp"
#include "qsbps/parallel.hpp"
#include "qsbps/rng.hpp"
#include "qsbps/selector.hpp"
#include "qsbps/session.hpp"
#include "qsbps/simulator.hpp"
#include "qsbps/split.hpp"
#include "qsbps/synthetic.hpp"
#include "qsbps/tokenizer.hpp"
#include "qsbps/topic_index.hpp"
#include "qsbps/trainer.hpp"
#include "qsbps/workspace.hpp"
