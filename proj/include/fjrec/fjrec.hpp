#ifndef FJREC_FJREC_HPP_
#define FJREC_FJREC_HPP_

#include "fjrec/analysis.hpp"
#include "fjrec/controllers.hpp"
#include "fjrec/error.hpp"
#include "fjrec/harness/batch.hpp"
#include "fjrec/harness/generator.hpp"
#include "fjrec/harness/io.hpp"
#include "fjrec/harness/scenario.hpp"
#include "fjrec/numerics/linalg.hpp"
#include "fjrec/numerics/matrix.hpp"
#include "fjrec/numerics/qp.hpp"
#include "fjrec/numerics/settings.hpp"
#include "fjrec/opinion_model.hpp"
#include "fjrec/plant.hpp"

#endif  // FJREC_FJREC_HPP_
