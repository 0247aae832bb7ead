#pragma once

#include <iosfwd>

namespace plbif::cli {

/// Exact examples with known closed-form answers. Prints one line per check.
bool run_selftest(std::ostream& out);

}  // namespace plbif::cli
