#pragma once

#include <string>

#include "plbif/map_family.hpp"

namespace plbif {

/// Parses the key = value family format (see docs/family-format.md).
MapFamily parse_family(const std::string& text);
MapFamily load_family(const std::string& path);

/// Inverse of parse_family: parse_family(family_to_text(f)) describes f.
std::string family_to_text(const MapFamily& family);

}  // namespace plbif
