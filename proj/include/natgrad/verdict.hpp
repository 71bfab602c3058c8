#pragma once

#include <string>

namespace natgrad {

enum class Verdict { holds, fails, inconclusive };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::fails: return "fails";
    default: return "inconclusive";
  }
}

}  // namespace natgrad
