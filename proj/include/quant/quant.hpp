#pragma once

#include "quant/core.hpp"
#include "quant/textprep.hpp"
#include "quant/eval.hpp"
#include "quant/linear_model.hpp"
#include "quant/svm_struct.hpp"
#include "quant/svm_linear.hpp"
#include "quant/quantifiers.hpp"
#include "quant/dataset_io.hpp"
#include "quant/report.hpp"
#include "quant/experiment.hpp"
#include "quant/bundle.hpp"
