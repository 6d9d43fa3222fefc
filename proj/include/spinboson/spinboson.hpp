// spinboson.hpp — umbrella header

#pragma once

#include "spinboson/absorption.hpp"
#include "spinboson/adiabatic.hpp"
#include "spinboson/config.hpp"
#include "spinboson/io.hpp"
#include "spinboson/model.hpp"
#include "spinboson/phase_analysis.hpp"
#include "spinboson/pipeline.hpp"
#include "spinboson/spectrum.hpp"
