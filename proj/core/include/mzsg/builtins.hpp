#ifndef MZSG_BUILTINS_HPP
#define MZSG_BUILTINS_HPP

#include <string>
#include <vector>

#include "mzsg/model.hpp"

namespace mzsg {

/// Named reproducible fixtures used by the test and acceptance suites:
///   zero                all-trivial sanity model
///   linear-heat         f=0, Gamma=0, g(x)=x, wide moving obstacles
///   dynkin-1d           control-inert stopping game with binding obstacles
///   isaacs-separated-1d controlled drift kappa(a-b), separated running cost
///   matching-pennies    Gamma = a*b on {-1,1}^2; violates the Isaacs condition
GameModel builtin_model(const std::string& name);

std::vector<std::string> builtin_model_names();

std::vector<double> linspace(double lo, double hi, int count);

} // namespace mzsg

#endif // MZSG_BUILTINS_HPP
