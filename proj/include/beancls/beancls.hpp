#pragma once

// Umbrella header for the dry-bean classification toolkit.

#include "beancls/dataset.hpp"
#include "beancls/folds.hpp"
#include "beancls/gbt.hpp"
#include "beancls/grid.hpp"
#include "beancls/kernel.hpp"
#include "beancls/linalg.hpp"
#include "beancls/matrix.hpp"
#include "beancls/metrics.hpp"
#include "beancls/nested_cv.hpp"
#include "beancls/outlier.hpp"
#include "beancls/pca.hpp"
#include "beancls/prng.hpp"
#include "beancls/report.hpp"
#include "beancls/scaler.hpp"
#include "beancls/smo.hpp"
#include "beancls/svm.hpp"
#include "beancls/textio.hpp"
