#pragma once

#include "krasno/engine.hpp"
#include "krasno/errors.hpp"
#include "krasno/expr.hpp"
#include "krasno/function_model.hpp"
#include "krasno/lipschitz.hpp"
#include "krasno/newton.hpp"
#include "krasno/oracle.hpp"
