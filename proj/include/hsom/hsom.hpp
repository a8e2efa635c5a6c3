#pragma once

#include "hsom/config.hpp"
#include "hsom/dataset.hpp"
#include "hsom/errors.hpp"
#include "hsom/evaluate.hpp"
#include "hsom/generator.hpp"
#include "hsom/geometry.hpp"
#include "hsom/model.hpp"
#include "hsom/objects.hpp"
#include "hsom/pipeline.hpp"
#include "hsom/pipeline_config.hpp"
#include "hsom/records.hpp"
#include "hsom/rng.hpp"
#include "hsom/skeleton.hpp"
#include "hsom/som.hpp"
#include "hsom/supervised.hpp"
#include "hsom/trajectory.hpp"
#include "hsom/window.hpp"
