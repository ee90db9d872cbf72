#pragma once

#include <string>
#include <vector>

namespace blp {

struct OracleCheck {
  std::string name;
  double value;      ///< worst error or residual observed
  double threshold;
  bool pass;
};

/// Closed-form Yule oracles and the A / phi functional identities for three laws.
std::vector<OracleCheck> gw_oracle_suite();

/// H inversion residuals and the L == 1 closed forms of h and r.
std::vector<OracleCheck> scaling_oracle_suite();

}  // namespace blp
