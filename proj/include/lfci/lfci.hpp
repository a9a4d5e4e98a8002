#ifndef LFCI_LFCI_HPP
#define LFCI_LFCI_HPP

#include "citest.hpp"
#include "discovery.hpp"
#include "graph.hpp"
#include "orientation.hpp"
#include "projection.hpp"
#include "rng.hpp"
#include "sem.hpp"
#include "separation.hpp"
#include "simbench.hpp"

#endif  // LFCI_LFCI_HPP
