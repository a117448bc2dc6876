#pragma once

#include "reform/core.hpp"
#include "reform/engine.hpp"
#include "reform/factory.hpp"
#include "reform/solvers/auto.hpp"
#include "reform/solvers/bfs.hpp"
#include "reform/solvers/deg3.hpp"
#include "reform/solvers/fpt.hpp"
#include "reform/solvers/result.hpp"
#include "reform/solvers/two_acceptor.hpp"
