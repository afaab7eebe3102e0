#include "mkslab/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace mkslab {

namespace {

using Json = nlohmann::json;
using Meta = std::map<std::string, std::string>;

constexpr char kMagic[] = "MKSLAB1\n";
constexpr std::size_t kMagicSize = 8;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || (*end != '\0' && *end != '\r')) {
    fail(ErrorCode::ParseError, "not a number: '" + text + "'");
  }
  return v;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  if (text.empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) out.push_back(parse_double(item));
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ';';
    out += num(v[i]);
  }
  return out;
}

struct Table {
  Meta meta;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> data;  // per column
};

std::string write_table(const std::string& version, const std::vector<std::pair<std::string, std::string>>& meta,
                        const std::vector<std::string>& columns,
                        const std::vector<const Eigen::VectorXd*>& data) {
  std::string out = "# " + version + "\n";
  for (const auto& [k, v] : meta) out += "# " + k + "=" + v + "\n";
  for (std::size_t c = 0; c < columns.size(); ++c) out += (c ? "," : "") + columns[c];
  out += "\n";
  const Eigen::Index n = data.empty() ? 0 : data.front()->size();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < data.size(); ++c) out += (c ? "," : "") + num((*data[c])[i]);
    out += "\n";
  }
  return out;
}

Table read_table(const std::string& text, const std::string& version) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# " + version, 0) != 0) {
    fail(ErrorCode::ParseError, "expected a '" + version + "' header");
  }
  Table t;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos || line.size() < 3) {
        fail(ErrorCode::ParseError, "malformed metadata line: " + line);
      }
      t.meta[line.substr(2, eq - 2)] = line.substr(eq + 1);
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (t.columns.empty()) {
      t.columns = cells;
      t.data.resize(cells.size());
      continue;
    }
    if (cells.size() != t.columns.size()) {
      fail(ErrorCode::ParseError, "row has " + std::to_string(cells.size()) + " cells, expected " +
                                      std::to_string(t.columns.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) t.data[c].push_back(parse_double(cells[c]));
  }
  if (t.columns.empty()) fail(ErrorCode::ParseError, "missing column header");
  return t;
}

const std::string& need(const Meta& m, const std::string& key) {
  const auto it = m.find(key);
  if (it == m.end()) fail(ErrorCode::ParseError, "missing metadata '" + key + "'");
  return it->second;
}

Eigen::VectorXd column(const Table& t, const std::string& name) {
  const auto it = std::find(t.columns.begin(), t.columns.end(), name);
  if (it == t.columns.end()) fail(ErrorCode::ParseError, "missing column '" + name + "'");
  const auto& v = t.data[static_cast<std::size_t>(it - t.columns.begin())];
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string pack(const Json& header, const std::vector<const Eigen::VectorXd*>& cols) {
  const std::string h = header.dump();
  std::string out(kMagic, kMagicSize);
  std::uint64_t len = h.size();
  char lenbuf[8];
  for (int i = 0; i < 8; ++i) lenbuf[i] = static_cast<char>((len >> (8 * i)) & 0xff);
  out.append(lenbuf, 8);
  out += h;
  for (const auto* c : cols) {
    for (Eigen::Index i = 0; i < c->size(); ++i) {
      std::uint64_t bits;
      const double v = (*c)[i];
      std::memcpy(&bits, &v, 8);
      for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
    }
  }
  return out;
}

Json unpack(const std::string& bytes, std::vector<Eigen::VectorXd>& cols, std::size_t ncols,
            const std::string& version) {
  if (bytes.size() < kMagicSize + 8 || bytes.compare(0, kMagicSize, kMagic) != 0) {
    fail(ErrorCode::ParseError, "not a binary container");
  }
  std::uint64_t len = 0;
  for (int i = 0; i < 8; ++i) {
    len |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[kMagicSize + i])) << (8 * i);
  }
  const std::size_t start = kMagicSize + 8;
  if (bytes.size() < start + len) fail(ErrorCode::ParseError, "truncated header");
  Json header;
  try {
    header = Json::parse(bytes.substr(start, len));
  } catch (const std::exception& e) {
    fail(ErrorCode::ParseError, std::string("bad header: ") + e.what());
  }
  if (header.value("format", "") != version) {
    fail(ErrorCode::ParseError, "expected format '" + version + "'");
  }
  const auto n = header.at("points").get<std::size_t>();
  const std::size_t body = start + len;
  if (bytes.size() != body + 8 * n * ncols) fail(ErrorCode::ParseError, "payload size mismatch");
  cols.assign(ncols, Eigen::VectorXd(static_cast<Eigen::Index>(n)));
  for (std::size_t c = 0; c < ncols; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      std::uint64_t bits = 0;
      const std::size_t off = body + 8 * (c * n + i);
      for (int b = 0; b < 8; ++b) {
        bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[off + b])) << (8 * b);
      }
      double v;
      std::memcpy(&v, &bits, 8);
      cols[c][static_cast<Eigen::Index>(i)] = v;
    }
  }
  return header;
}

}  // namespace

// ---------------------------------------------------------------- profiles

std::string profile_to_csv(const Profile& p) {
  return write_table("profile-v1",
                     {{"kind", to_string(p.kind)},
                      {"mu", num(p.mu)},
                      {"s", num(p.s)},
                      {"L", num(p.L)},
                      {"N", std::to_string(p.N)},
                      {"a_plus", num(p.a_plus)},
                      {"phi_minus", num(p.phi_minus)},
                      {"phi_plus", num(p.phi_plus)},
                      {"phase_anchor", num(p.phase_anchor)},
                      {"residual", num(p.residual)}},
                     {"z", "phi", "dphi", "ddphi"}, {&p.z, &p.phi, &p.dphi, &p.ddphi});
}

Profile profile_from_csv(const std::string& text) {
  const Table t = read_table(text, "profile-v1");
  Profile p;
  p.kind = wave_kind_from_string(need(t.meta, "kind"));
  p.mu = parse_double(need(t.meta, "mu"));
  p.s = parse_double(need(t.meta, "s"));
  p.L = parse_double(need(t.meta, "L"));
  p.N = static_cast<int>(parse_double(need(t.meta, "N")));
  p.a_plus = parse_double(need(t.meta, "a_plus"));
  p.phi_minus = parse_double(need(t.meta, "phi_minus"));
  p.phi_plus = parse_double(need(t.meta, "phi_plus"));
  p.phase_anchor = parse_double(need(t.meta, "phase_anchor"));
  p.residual = parse_double(need(t.meta, "residual"));
  p.z = column(t, "z");
  p.phi = column(t, "phi");
  p.dphi = column(t, "dphi");
  p.ddphi = column(t, "ddphi");
  return p;
}

std::string profile_to_binary(const Profile& p) {
  Json h{{"format", "profile-v1"}, {"kind", to_string(p.kind)}, {"mu", p.mu},
         {"s", p.s}, {"L", p.L}, {"N", p.N}, {"a_plus", p.a_plus},
         {"phi_minus", p.phi_minus}, {"phi_plus", p.phi_plus},
         {"phase_anchor", p.phase_anchor}, {"residual", p.residual},
         {"points", p.z.size()}, {"columns", {"z", "phi", "dphi", "ddphi"}}};
  return pack(h, {&p.z, &p.phi, &p.dphi, &p.ddphi});
}

Profile profile_from_binary(const std::string& bytes) {
  std::vector<Eigen::VectorXd> cols;
  const Json h = unpack(bytes, cols, 4, "profile-v1");
  Profile p;
  p.kind = wave_kind_from_string(h.at("kind").get<std::string>());
  p.mu = h.at("mu");
  p.s = h.at("s");
  p.L = h.at("L");
  p.N = h.at("N");
  p.a_plus = h.at("a_plus");
  p.phi_minus = h.at("phi_minus");
  p.phi_plus = h.at("phi_plus");
  p.phase_anchor = h.at("phase_anchor");
  p.residual = h.at("residual");
  p.z = cols[0];
  p.phi = cols[1];
  p.dphi = cols[2];
  p.ddphi = cols[3];
  return p;
}

// ---------------------------------------------------------------- patterns

std::string pattern_to_csv(const PeriodicPattern& p) {
  return write_table("pattern-v1",
                     {{"X", num(p.X)},
                      {"s", num(p.s)},
                      {"mu", num(p.mu)},
                      {"total_spacing", num(p.total_spacing)},
                      {"blend_width", num(p.blend_width)},
                      {"layout", join(p.layout)},
                      {"layer_centers", join(p.layer_centers)}},
                     {"z", "phi", "dphi", "ddphi"}, {&p.z, &p.phi, &p.dphi, &p.ddphi});
}

PeriodicPattern pattern_from_csv(const std::string& text) {
  const Table t = read_table(text, "pattern-v1");
  PeriodicPattern p;
  p.X = parse_double(need(t.meta, "X"));
  p.s = parse_double(need(t.meta, "s"));
  p.mu = parse_double(need(t.meta, "mu"));
  p.total_spacing = parse_double(need(t.meta, "total_spacing"));
  p.blend_width = parse_double(need(t.meta, "blend_width"));
  p.layout = parse_list(need(t.meta, "layout"));
  p.layer_centers = parse_list(need(t.meta, "layer_centers"));
  p.z = column(t, "z");
  p.phi = column(t, "phi");
  p.dphi = column(t, "dphi");
  p.ddphi = column(t, "ddphi");
  return p;
}

std::string pattern_to_binary(const PeriodicPattern& p) {
  Json h{{"format", "pattern-v1"}, {"X", p.X}, {"s", p.s}, {"mu", p.mu},
         {"total_spacing", p.total_spacing}, {"blend_width", p.blend_width},
         {"layout", p.layout}, {"layer_centers", p.layer_centers},
         {"points", p.z.size()}, {"columns", {"z", "phi", "dphi", "ddphi"}}};
  return pack(h, {&p.z, &p.phi, &p.dphi, &p.ddphi});
}

PeriodicPattern pattern_from_binary(const std::string& bytes) {
  std::vector<Eigen::VectorXd> cols;
  const Json h = unpack(bytes, cols, 4, "pattern-v1");
  PeriodicPattern p;
  p.X = h.at("X");
  p.s = h.at("s");
  p.mu = h.at("mu");
  p.total_spacing = h.at("total_spacing");
  p.blend_width = h.at("blend_width");
  p.layout = h.at("layout").get<std::vector<double>>();
  p.layer_centers = h.at("layer_centers").get<std::vector<double>>();
  p.z = cols[0];
  p.phi = cols[1];
  p.dphi = cols[2];
  p.ddphi = cols[3];
  return p;
}

// ------------------------------------------------------------- hill spectra

std::string hill_to_csv(const HillSpectrum& h) {
  std::string out = "# hill-v1\n";
  out += "# modes=" + std::to_string(h.modes) + "\n";
  out += "# max_re=" + num(h.max_re) + "\n";
  out += "# max_re_xi=" + num(h.max_re_xi) + "\n";
  out += "# coefficient_tail=" + num(h.coefficient_tail) + "\n";
  out += "xi,re,im\n";
  for (std::size_t j = 0; j < h.floquet.size(); ++j) {
    for (const cdouble& v : h.eigenvalues[j]) {
      out += num(h.floquet[j]) + "," + num(v.real()) + "," + num(v.imag()) + "\n";
    }
  }
  return out;
}

HillSpectrum hill_from_csv(const std::string& text) {
  const Table t = read_table(text, "hill-v1");
  HillSpectrum h;
  h.modes = static_cast<int>(parse_double(need(t.meta, "modes")));
  h.max_re = parse_double(need(t.meta, "max_re"));
  h.max_re_xi = parse_double(need(t.meta, "max_re_xi"));
  h.coefficient_tail = parse_double(need(t.meta, "coefficient_tail"));
  const Eigen::VectorXd xi = column(t, "xi"), re = column(t, "re"), im = column(t, "im");
  for (Eigen::Index i = 0; i < xi.size(); ++i) {
    if (h.floquet.empty() || h.floquet.back() != xi[i]) {
      h.floquet.push_back(xi[i]);
      h.eigenvalues.emplace_back();
    }
    h.eigenvalues.back().emplace_back(re[i], im[i]);
  }
  return h;
}

// -------------------------------------------------------------------- files

void write_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) fail(ErrorCode::IoError, "write to " + path.string() + " failed");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Profile load_profile(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.compare(0, kMagicSize, kMagic) == 0) return profile_from_binary(bytes);
  return profile_from_csv(bytes);
}

PeriodicPattern load_pattern(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.compare(0, kMagicSize, kMagic) == 0) return pattern_from_binary(bytes);
  return pattern_from_csv(bytes);
}

// -------------------------------------------------------------------- plots

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Round numbers for axis ticks.
std::vector<double> ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  std::vector<double> out;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step) out.push_back(t);
  return out;
}

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

}  // namespace

std::string emit_plot(const Plot& plot) {
  double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
  std::size_t points = 0;
  for (const auto& s : plot.series) {
    if (s.x.size() != s.y.size()) {
      fail(ErrorCode::InvalidArgument, "emit_plot: series '" + s.name + "' has mismatched x/y");
    }
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      ylo = std::min(ylo, s.y[i]);
      yhi = std::max(yhi, s.y[i]);
      ++points;
    }
  }
  if (points == 0) fail(ErrorCode::PlotEmpty, "emit_plot: no finite data");
  if (xhi - xlo < 1e-12) {
    xlo -= 1.0;
    xhi += 1.0;
  }
  if (yhi - ylo < 1e-12) {
    ylo -= 1.0;
    yhi += 1.0;
  }
  const double padx = 0.03 * (xhi - xlo), pady = 0.05 * (yhi - ylo);
  xlo -= padx;
  xhi += padx;
  ylo -= pady;
  yhi += pady;

  const double W = plot.width, H = plot.height;
  const double left = 70, right = 20, top = 36, bottom = 52;
  const double pw = W - left - right, ph = H - top - bottom;
  auto X = [&](double x) { return left + (x - xlo) / (xhi - xlo) * pw; };
  auto Y = [&](double y) { return top + (yhi - y) / (yhi - ylo) * ph; };

  std::string o;
  o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(plot.width) +
       "\" height=\"" + std::to_string(plot.height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o += "<text x=\"" + fmt(W / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" +
       escape(plot.title) + "</text>\n";
  o += "<rect x=\"" + fmt(left) + "\" y=\"" + fmt(top) + "\" width=\"" + fmt(pw) + "\" height=\"" +
       fmt(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : ticks(xlo, xhi)) {
    o += "<line x1=\"" + fmt(X(t)) + "\" y1=\"" + fmt(top + ph) + "\" x2=\"" + fmt(X(t)) +
         "\" y2=\"" + fmt(top + ph + 5) + "\" stroke=\"black\"/>\n";
    o += "<text x=\"" + fmt(X(t)) + "\" y=\"" + fmt(top + ph + 18) + "\" text-anchor=\"middle\">" +
         tick(t) + "</text>\n";
  }
  for (double t : ticks(ylo, yhi)) {
    o += "<line x1=\"" + fmt(left - 5) + "\" y1=\"" + fmt(Y(t)) + "\" x2=\"" + fmt(left) +
         "\" y2=\"" + fmt(Y(t)) + "\" stroke=\"black\"/>\n";
    o += "<text x=\"" + fmt(left - 8) + "\" y=\"" + fmt(Y(t) + 4) + "\" text-anchor=\"end\">" +
         tick(t) + "</text>\n";
  }
  o += "<text x=\"" + fmt(left + pw / 2) + "\" y=\"" + fmt(H - 12) + "\" text-anchor=\"middle\">" +
       escape(plot.x_label) + "</text>\n";
  o += "<text x=\"16\" y=\"" + fmt(top + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
       fmt(top + ph / 2) + ")\">" + escape(plot.y_label) + "</text>\n";

  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const auto& s = plot.series[k];
    const char* color = kColors[k % (sizeof kColors / sizeof kColors[0])];
    if (s.style == PlotStyle::Line) {
      std::string d;
      bool pen = false;
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
          pen = false;
          continue;
        }
        d += (pen ? " L" : " M") + fmt(X(s.x[i])) + " " + fmt(Y(s.y[i]));
        pen = true;
      }
      o += "<path d=\"" + d.substr(d.empty() ? 0 : 1) + "\" fill=\"none\" stroke=\"" + color +
           "\" stroke-width=\"1.5\"/>\n";
    } else {
      o += "<g fill=\"" + std::string(color) + "\">\n";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        o += "<circle cx=\"" + fmt(X(s.x[i])) + "\" cy=\"" + fmt(Y(s.y[i])) + "\" r=\"1.6\"/>\n";
      }
      o += "</g>\n";
    }
    if (!s.name.empty()) {
      const double ly = top + 14 + 16 * static_cast<double>(k);
      o += "<rect x=\"" + fmt(left + pw - 130) + "\" y=\"" + fmt(ly - 8) +
           "\" width=\"10\" height=\"10\" fill=\"" + color + "\"/>\n";
      o += "<text x=\"" + fmt(left + pw - 115) + "\" y=\"" + fmt(ly + 1) + "\">" + escape(s.name) +
           "</text>\n";
    }
  }
  o += "</svg>\n";
  return o;
}

}  // namespace mkslab
