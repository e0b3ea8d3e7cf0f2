#include "soliton/field_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "soliton/errors.hpp"

namespace soliton {

using nlohmann::json;

std::string sidecar_path(const std::string& csv_path) {
  std::filesystem::path p(csv_path);
  p.replace_extension(".json");
  return p.string();
}

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_field(const std::string& csv_path, const ScalarField& field,
                 const std::optional<SolitonParams>& params) {
  const Grid2& g = *field.grid;
  std::ofstream csv(csv_path);
  if (!csv) throw Error("cannot open " + csv_path + " for writing");
  csv << "x,y,u\n";
  // Unknowns are numbered row-major already.
  for (int k = 0; k < g.unknown_count(); ++k) {
    const Vec2 x = g.position(k);
    csv << fmt17(x.x()) << ',' << fmt17(x.y()) << ',' << fmt17(field.values[static_cast<std::size_t>(k)]) << '\n';
  }
  json meta;
  meta["origin"] = {g.origin().x(), g.origin().y()};
  meta["spacing"] = g.spacing();
  meta["nx"] = g.nx();
  meta["ny"] = g.ny();
  if (params) {
    meta["C"] = params->c;
    meta["n"] = params->dim;
  }
  json cuts = json::array();
  for (std::size_t c = 0; c < g.cuts().size(); ++c) {
    const auto& cut = g.cuts()[c];
    const auto [i, j] = g.node(cut.node);
    cuts.push_back({i, j, cut.dir, cut.theta, field.boundary[c]});
  }
  meta["cuts"] = std::move(cuts);
  std::ofstream side(sidecar_path(csv_path));
  side << std::setprecision(17) << meta.dump(1) << '\n';
}

FieldFile read_field(const std::string& csv_path) {
  std::ifstream csv(csv_path);
  if (!csv) throw Error("cannot open " + csv_path);
  std::string line;
  std::getline(csv, line);
  line.erase(std::remove_if(line.begin(), line.end(), ::isspace), line.end());
  if (line != "x,y,u") throw Error(csv_path + ": expected header x,y,u");
  std::vector<std::array<double, 3>> rows;
  while (std::getline(csv, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::array<double, 3> r{};
    std::istringstream ss(line);
    std::string cell;
    for (std::size_t c = 0; c < 3; ++c) {
      if (!std::getline(ss, cell, ',')) throw Error(csv_path + ": malformed row '" + line + "'");
      r[c] = std::stod(cell);
    }
    rows.push_back(r);
  }
  if (rows.empty()) throw Error(csv_path + ": no data rows");

  FieldFile out;
  json meta;
  const std::string side = sidecar_path(csv_path);
  if (std::filesystem::exists(side)) {
    std::ifstream in(side);
    meta = json::parse(in);
  }
  if (meta.contains("C")) out.params = SolitonParams::make(meta["C"].get<double>(), meta.value("n", 2));

  Vec2 origin;
  double h;
  int nx, ny;
  if (meta.contains("spacing")) {
    origin = Vec2(meta["origin"][0].get<double>(), meta["origin"][1].get<double>());
    h = meta["spacing"].get<double>();
    nx = meta["nx"].get<int>();
    ny = meta["ny"].get<int>();
  } else {
    std::vector<double> xs, ys;
    for (const auto& r : rows) {
      xs.push_back(r[0]);
      ys.push_back(r[1]);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    std::sort(ys.begin(), ys.end());
    ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
    if (xs.size() < 3 || ys.size() < 3) throw Error(csv_path + ": need at least 3 distinct x and y values");
    h = xs[1] - xs[0];
    origin = Vec2(xs.front(), ys.front());
    nx = static_cast<int>(std::lround((xs.back() - xs.front()) / h)) + 1;
    ny = static_cast<int>(std::lround((ys.back() - ys.front()) / h)) + 1;
  }

  std::vector<std::uint8_t> mask(static_cast<std::size_t>(nx) * ny, 0);
  std::vector<double> nodal(mask.size(), 0.0);
  for (const auto& r : rows) {
    const long i = std::lround((r[0] - origin.x()) / h), j = std::lround((r[1] - origin.y()) / h);
    if (i < 0 || j < 0 || i >= nx || j >= ny) throw Error(csv_path + ": point outside the grid");
    const std::size_t id = static_cast<std::size_t>(j) * nx + static_cast<std::size_t>(i);
    mask[id] = 1;
    nodal[id] = r[2];
  }

  std::shared_ptr<const Grid2> grid;
  ScalarField& f = out.field;
  if (meta.contains("cuts") && !meta["cuts"].empty()) {
    std::vector<Grid2::CutSpec> specs;
    std::map<std::array<int, 3>, double> values;
    for (const auto& c : meta["cuts"]) {
      const int i = c[0].get<int>(), j = c[1].get<int>(), dir = c[2].get<int>();
      specs.push_back({i, j, dir, c[3].get<double>()});
      values[{i, j, dir}] = c[4].get<double>();
    }
    grid = std::make_shared<const Grid2>(Grid2::from_parts(origin, h, nx, ny, mask, specs));
    for (const auto& cut : grid->cuts()) {
      const auto [i, j] = grid->node(cut.node);
      const auto it = values.find({i, j, cut.dir});
      if (it == values.end()) throw Error(side + ": cut list does not match the node mask");
      f.boundary.push_back(it->second);
    }
  } else {
    grid = std::make_shared<const Grid2>(Grid2::from_mask(origin, h, nx, ny, mask));
    for (const auto& cut : grid->cuts()) {
      const auto [i, j] = grid->node(cut.node);
      const auto& d = kDirections[static_cast<std::size_t>(cut.dir)];
      f.boundary.push_back(nodal[static_cast<std::size_t>(j + d[1]) * nx + (i + d[0])]);
    }
  }
  f.values.resize(static_cast<std::size_t>(grid->unknown_count()));
  for (int k = 0; k < grid->unknown_count(); ++k) {
    const auto [i, j] = grid->node(k);
    f.values[static_cast<std::size_t>(k)] = nodal[static_cast<std::size_t>(j) * nx + i];
  }
  f.grid = std::move(grid);
  return out;
}

}  // namespace soliton
