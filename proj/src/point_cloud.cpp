#include "rpgrasp/point_cloud.hpp"

#include "rpgrasp/error.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

namespace rpgrasp {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_double(std::string_view tok, double& out) {
  const auto* first = tok.data();
  const auto* last = tok.data() + tok.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  if (sep == ' ') {
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
      if (i >= line.size()) break;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
      out.push_back(line.substr(i, j - i));
      i = j;
    }
    return out;
  }
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    auto tok = line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.remove_prefix(1);
    while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t' || tok.back() == '\r')) tok.remove_suffix(1);
    out.push_back(tok);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

PointCloud parse_csv(std::istream& in) {
  PointCloud cloud;
  std::string line;
  std::size_t row = 0;
  int columns = -1;
  while (std::getline(in, line)) {
    ++row;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto toks = split(t, ',');
    std::vector<double> vals(toks.size());
    bool numeric = true;
    for (std::size_t k = 0; k < toks.size(); ++k) numeric = numeric && parse_double(toks[k], vals[k]);
    if (!numeric) {
      // A non-numeric first data line is a header ("x,y,z").
      if (cloud.points.empty() && columns < 0) {
        columns = static_cast<int>(toks.size());
        continue;
      }
      throw DataError("csv: malformed row " + std::to_string(row));
    }
    if (vals.size() != 3 && vals.size() != 6)
      throw DataError("csv: row " + std::to_string(row) + " has " + std::to_string(vals.size()) +
                      " columns, expected 3 or 6");
    if (columns < 0) columns = static_cast<int>(vals.size());
    if (static_cast<int>(vals.size()) != columns)
      throw DataError("csv: row " + std::to_string(row) + " has " + std::to_string(vals.size()) +
                      " columns, expected " + std::to_string(columns));
    cloud.points.emplace_back(vals[0], vals[1], vals[2]);
    if (vals.size() == 6) cloud.normals.emplace_back(vals[3], vals[4], vals[5]);
  }
  if (!cloud.normals.empty() && cloud.normals.size() != cloud.points.size())
    throw DataError("csv: normals present on only some rows");
  if (cloud.points.empty()) throw DataError("csv: empty cloud");
  return cloud;
}

PointCloud parse_ply(std::istream& in) {
  std::string line;
  std::size_t row = 0;
  auto next = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++row;
    return true;
  };
  if (!next() || trim(line) != "ply") throw DataError("ply: missing magic on row 1");

  struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<std::string> props;
    std::vector<bool> is_list;
  };
  std::vector<Element> elements;
  bool ascii = false;
  for (;;) {
    if (!next()) throw DataError("ply: unterminated header");
    const std::string t = trim(line);
    const auto toks = split(t, ' ');
    if (toks.empty() || toks[0] == "comment" || toks[0] == "obj_info") continue;
    if (toks[0] == "end_header") break;
    if (toks[0] == "format") {
      if (toks.size() < 2) throw DataError("ply: malformed format on row " + std::to_string(row));
      ascii = toks[1] == "ascii";
    } else if (toks[0] == "element") {
      if (toks.size() != 3) throw DataError("ply: malformed element on row " + std::to_string(row));
      Element e;
      e.name = std::string(toks[1]);
      double n = 0;
      if (!parse_double(toks[2], n) || n < 0) throw DataError("ply: bad element count on row " + std::to_string(row));
      e.count = static_cast<std::size_t>(n);
      elements.push_back(std::move(e));
    } else if (toks[0] == "property") {
      if (elements.empty()) throw DataError("ply: property before element on row " + std::to_string(row));
      if (toks.size() >= 2 && toks[1] == "list") {
        if (toks.size() != 5) throw DataError("ply: malformed list property on row " + std::to_string(row));
        elements.back().props.emplace_back(toks[4]);
        elements.back().is_list.push_back(true);
      } else {
        if (toks.size() != 3) throw DataError("ply: malformed property on row " + std::to_string(row));
        elements.back().props.emplace_back(toks[2]);
        elements.back().is_list.push_back(false);
      }
    } else {
      throw DataError("ply: unknown header keyword on row " + std::to_string(row));
    }
  }
  if (!ascii) throw DataError("ply: only ascii format is supported");

  PointCloud cloud;
  for (const auto& e : elements) {
    if (e.name != "vertex") {
      for (std::size_t k = 0; k < e.count; ++k)
        if (!next()) throw DataError("ply: truncated element '" + e.name + "'");
      continue;
    }
    int ix = -1, iy = -1, iz = -1, inx = -1, iny = -1, inz = -1;
    for (std::size_t k = 0; k < e.props.size(); ++k) {
      if (e.is_list[k]) throw DataError("ply: list properties on vertices are not supported");
      const auto& p = e.props[k];
      const int idx = static_cast<int>(k);
      if (p == "x") ix = idx;
      else if (p == "y") iy = idx;
      else if (p == "z") iz = idx;
      else if (p == "nx") inx = idx;
      else if (p == "ny") iny = idx;
      else if (p == "nz") inz = idx;
    }
    if (ix < 0 || iy < 0 || iz < 0) throw DataError("ply: vertex element lacks x/y/z");
    const bool normals = inx >= 0 && iny >= 0 && inz >= 0;
    for (std::size_t k = 0; k < e.count; ++k) {
      if (!next()) throw DataError("ply: truncated vertex list at row " + std::to_string(row + 1));
      const std::string t = trim(line);
      const auto toks = split(t, ' ');
      if (toks.size() != e.props.size())
        throw DataError("ply: malformed row " + std::to_string(row) + " (expected " +
                        std::to_string(e.props.size()) + " values)");
      std::vector<double> v(toks.size());
      for (std::size_t m = 0; m < toks.size(); ++m)
        if (!parse_double(toks[m], v[m])) throw DataError("ply: malformed row " + std::to_string(row));
      cloud.points.emplace_back(v[ix], v[iy], v[iz]);
      if (normals) cloud.normals.emplace_back(v[inx], v[iny], v[inz]);
    }
  }
  if (cloud.points.empty()) throw DataError("ply: empty cloud");
  return cloud;
}

PointCloud load_cloud(const std::filesystem::path& path, std::optional<CloudFormat> format) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open cloud file " + path.string());
  if (!format) {
    const auto ext = path.extension().string();
    format = (ext == ".csv" || ext == ".CSV") ? CloudFormat::Csv : CloudFormat::Ply;
  }
  try {
    return *format == CloudFormat::Csv ? parse_csv(in) : parse_ply(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_ply(std::ostream& out, const PointCloud& cloud) {
  out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size() << "\n"
      << "property double x\nproperty double y\nproperty double z\n";
  if (cloud.has_normals()) out << "property double nx\nproperty double ny\nproperty double nz\n";
  out << "end_header\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud.points[i];
    out << p.x() << ' ' << p.y() << ' ' << p.z();
    if (cloud.has_normals()) {
      const auto& n = cloud.normals[i];
      out << ' ' << n.x() << ' ' << n.y() << ' ' << n.z();
    }
    out << '\n';
  }
}

void write_csv(std::ostream& out, const PointCloud& cloud) {
  out << (cloud.has_normals() ? "x,y,z,nx,ny,nz\n" : "x,y,z\n");
  out << std::setprecision(17);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud.points[i];
    out << p.x() << ',' << p.y() << ',' << p.z();
    if (cloud.has_normals()) {
      const auto& n = cloud.normals[i];
      out << ',' << n.x() << ',' << n.y() << ',' << n.z();
    }
    out << '\n';
  }
}

PointCloud transformed(const PointCloud& cloud, const Pose& t) {
  PointCloud out;
  out.points.reserve(cloud.size());
  for (const auto& p : cloud.points) out.points.push_back(t.transform_point(p));
  for (const auto& n : cloud.normals) out.normals.push_back(t.rotate(n));
  return out;
}

}  // namespace rpgrasp
