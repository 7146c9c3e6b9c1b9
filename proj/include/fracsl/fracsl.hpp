#pragma once

#include <fracsl/errors.hpp>
#include <fracsl/fractional_ops.hpp>
#include <fracsl/potential.hpp>
#include <fracsl/report.hpp>
#include <fracsl/special_functions.hpp>
#include <fracsl/spectrum.hpp>
#include <fracsl/volterra.hpp>
