#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mkslab/periodic.hpp"
#include "mkslab/profile.hpp"

namespace mkslab {

// Profiles and patterns are written as CSV with "# key=value" metadata lines
// under a versioned first line, or as a binary container: the magic
// "MKSLAB1\n", a little-endian u64 header length, the JSON header, then the
// columns as little-endian doubles.

std::string profile_to_csv(const Profile& p);
Profile profile_from_csv(const std::string& text);
std::string profile_to_binary(const Profile& p);
Profile profile_from_binary(const std::string& bytes);

std::string pattern_to_csv(const PeriodicPattern& p);
PeriodicPattern pattern_from_csv(const std::string& text);
std::string pattern_to_binary(const PeriodicPattern& p);
PeriodicPattern pattern_from_binary(const std::string& bytes);

/// xi, Re lambda, Im lambda per eigenvalue.
std::string hill_to_csv(const HillSpectrum& h);
HillSpectrum hill_from_csv(const std::string& text);

void write_file(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

/// Reads either format, chosen by the leading bytes.
Profile load_profile(const std::filesystem::path& path);
PeriodicPattern load_pattern(const std::filesystem::path& path);

// ------------------------------------------------------------------ plots

enum class PlotStyle { Line, Scatter };

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  PlotStyle style = PlotStyle::Line;
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
  int width = 640;
  int height = 420;
};

/// Deterministic SVG: fixed number formatting and series order.
std::string emit_plot(const Plot& plot);

}  // namespace mkslab
