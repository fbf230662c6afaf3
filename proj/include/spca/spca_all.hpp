#pragma once

#include "spca/types.hpp"
#include "spca/linalg.hpp"
#include "spca/self_paced.hpp"
#include "spca/fidelity.hpp"
#include "spca/projection.hpp"
#include "spca/spca.hpp"
#include "spca/baselines.hpp"
#include "spca/diagnostics.hpp"
#include "spca/io.hpp"
#include "spca/data.hpp"
#include "spca/synthetic.hpp"
