#pragma once

#include "g2l/error.hpp"
#include "g2l/random.hpp"
#include "g2l/raster/codec.hpp"
#include "g2l/raster/font.hpp"
#include "g2l/raster/image.hpp"
#include "g2l/chart_model.hpp"
#include "g2l/corpus.hpp"
#include "g2l/cnn/network.hpp"
#include "g2l/cnn/model_io.hpp"
#include "g2l/cnn/train.hpp"
#include "g2l/ocr.hpp"
#include "g2l/semantics.hpp"
#include "g2l/codegen.hpp"
#include "g2l/app/pipeline.hpp"
