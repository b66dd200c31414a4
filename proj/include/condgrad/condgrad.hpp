#pragma once

#include "condgrad/core.hpp"
#include "condgrad/regions.hpp"
#include "condgrad/objectives.hpp"
#include "condgrad/step_rules.hpp"
#include "condgrad/trace.hpp"
#include "condgrad/fw.hpp"
#include "condgrad/active_set_methods.hpp"
#include "condgrad/lazy.hpp"
#include "condgrad/sliding.hpp"
#include "condgrad/stochastic.hpp"
#include "condgrad/caratheodory.hpp"
#include "condgrad/meb.hpp"
#include "condgrad/dopt.hpp"
