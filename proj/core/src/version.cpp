#include "plbif/version.hpp"

namespace plbif {

const char* version() { return PLBIF_VERSION; }

}  // namespace plbif
