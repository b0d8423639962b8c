#pragma once

#include <string>
#include <vector>

#include "aqc/densities.hpp"
#include "aqc/symbols.hpp"

namespace aqc {

/// Built-in operators, addressable by label:
///   div2d                  divergence of a 2-vector field (l=1, d=2, N=2)
///   scalar-curl2d          rotated gradient / scalar curl (l=1, d=2, N=2)
///   scaled-div2d           a(x) d1 v1 + d2 v2 with a(x) = 1 + amp sin(2 pi x1),
///                          optional parameter amp (default 0.5)
///   diag-nonconstant-rank  diag(lambda1, lambda2) symbol; rank varies (negative test)
CoefficientField make_operator(const std::string& spec);

/// Built-in integrands, addressable by label:
///   quad        |xi|^2                                   (convex)
///   dwell       (|xi|^2 - 1)^2
///   pnorm       |xi|^q, parameter q >= 1 (default 4)     (convex)
///   coupled     (1 + |u|^2)(|xi|^2 - 1)^2 + b(x)|xi|^2 with b(x) = 1 + cos(2 pi x1)/2
EnergyDensity make_density(const std::string& spec);

std::vector<std::string> operator_labels();
std::vector<std::string> density_labels();

/// Splits "name(p1,p2)" into name and numeric parameters.
void parse_label(const std::string& spec, std::string* name, std::vector<double>* params);

}  // namespace aqc
