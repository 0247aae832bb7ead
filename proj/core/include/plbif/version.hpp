#pragma once

namespace plbif {

/// Library version "major.minor.patch".
const char* version();

}  // namespace plbif
