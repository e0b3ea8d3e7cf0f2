#pragma once

#include <optional>
#include <string>

#include "soliton/field.hpp"
#include "soliton/params.hpp"

namespace soliton {

/// Field on disk: `<stem>.csv` with header x,y,u (row-major, unknown nodes
/// only) and a `<stem>.json` sidecar with origin, spacing, nx, ny, C, n and
/// the cut points [i, j, dir, theta, value].
struct FieldFile {
  ScalarField field;
  std::optional<SolitonParams> params;
};

/// Writes `csv_path` and its sidecar (same path with a .json extension).
void write_field(const std::string& csv_path, const ScalarField& field,
                 const std::optional<SolitonParams>& params = std::nullopt);

/// Reads a field back. Without cut points in the sidecar (or without a
/// sidecar, in which case the spacing is inferred from the coordinates) the
/// outermost nodes of the CSV become the boundary.
FieldFile read_field(const std::string& csv_path);

std::string sidecar_path(const std::string& csv_path);

}  // namespace soliton
