#pragma once

// Umbrella header for the sarcasm CNN toolkit.

#include "scnn/checkpoint.hpp"
#include "scnn/dataset.hpp"
#include "scnn/embeddings.hpp"
#include "scnn/error.hpp"
#include "scnn/experiments.hpp"
#include "scnn/gradcheck.hpp"
#include "scnn/io.hpp"
#include "scnn/layers.hpp"
#include "scnn/manifest.hpp"
#include "scnn/metrics.hpp"
#include "scnn/model.hpp"
#include "scnn/network.hpp"
#include "scnn/optimizer.hpp"
#include "scnn/pca.hpp"
#include "scnn/rng.hpp"
#include "scnn/svm.hpp"
#include "scnn/synth.hpp"
#include "scnn/tensor.hpp"
#include "scnn/text.hpp"
#include "scnn/vocab.hpp"
