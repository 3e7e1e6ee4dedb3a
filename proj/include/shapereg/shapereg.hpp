#pragma once

// Umbrella header for the shapereg toolkit.

#include "shapereg/adaptive.hpp"
#include "shapereg/canny.hpp"
#include "shapereg/cellular.hpp"
#include "shapereg/components.hpp"
#include "shapereg/convolve.hpp"
#include "shapereg/coreset.hpp"
#include "shapereg/correspondence.hpp"
#include "shapereg/ga.hpp"
#include "shapereg/gmm.hpp"
#include "shapereg/image_io.hpp"
#include "shapereg/maca.hpp"
#include "shapereg/mdk.hpp"
#include "shapereg/metrics.hpp"
#include "shapereg/pipeline.hpp"
#include "shapereg/pyramid.hpp"
#include "shapereg/raster.hpp"
#include "shapereg/registration.hpp"
#include "shapereg/resample.hpp"
#include "shapereg/rng.hpp"
#include "shapereg/rule_db.hpp"
#include "shapereg/sift.hpp"
#include "shapereg/svrf.hpp"
#include "shapereg/synthetic.hpp"
