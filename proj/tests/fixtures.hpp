#pragma once

#include "kochlab/kochergin.hpp"

namespace kochlab::testing {

inline CirclePoint pt(double x) { return CirclePoint::from_double(x); }

inline const SingularRoof& default_roof() {
  static const SingularRoof roof = make_singular_roof(1.0 / 3.0, 0.1);
  return roof;
}

inline std::vector<CirclePoint> default_tuple() {
  return {pt(0.11), pt(0.37), pt(0.52), pt(0.83)};
}

inline const KocherginFlow& default_flow() {
  static const KocherginFlow flow =
      make_flow(cf_named("golden", 40), make_composite_roof(default_roof(), default_tuple()), 2.0);
  return flow;
}

}  // namespace kochlab::testing
