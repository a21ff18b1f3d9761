#pragma once

#include "incmeter/core.hpp"
#include "incmeter/measures.hpp"
#include "incmeter/mi.hpp"
#include "incmeter/multiset.hpp"
#include "incmeter/parser.hpp"
#include "incmeter/postulates.hpp"
#include "incmeter/rational.hpp"
#include "incmeter/registry.hpp"
#include "incmeter/report.hpp"
#include "incmeter/shapley.hpp"
#include "incmeter/synth.hpp"
