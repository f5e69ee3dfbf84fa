#pragma once

#include <ostream>

namespace epchiral::test {

struct Golden {
  const char* rho;
  const char* theta_i;
  const char* s[4][2];
};

inline void PrintTo(const Golden& g, std::ostream* os) { *os << "rho=" << g.rho << ",theta_i=" << g.theta_i; }

// One counter-clockwise cycle, kappa = g0 = 1, omega = 0.1. The theta_i = 0
// S22 carries the sign required by Tr S = 2.
inline const Golden kGolden[] = {
    {"1", "pi",
     {{"1.6003286929485", "0"},
      {"-0.26983259101832", "0.53626944011531"},
      {"0.26983259101832", "0.53626944011531"},
      {"0.39967130705149", "0"}}},
    {"6", "pi",
     {{"2.0644847016278", "0"},
      {"-0.93027858578974", "-0.51740644837560"},
      {"0.93027858578974", "-0.51740644837560"},
      {"-0.064484701627799", "0"}}},
    {"1", "0",
     {{"1.0770577614172e22", "0"},
      {"1.07582386952278e22", "-5.154050052286e20"},
      {"-1.07582386952278e22", "-5.154050052286e20"},
      {"-1.0770577614172e22", "0"}}},
};

}  // namespace epchiral::test
