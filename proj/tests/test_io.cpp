#include <filesystem>

#include <gtest/gtest.h>

#include "mkslab/io.hpp"

using namespace mkslab;

namespace {

const Profile& front0() {
  static const Profile p = compute_front(0.0, -2.388);
  return p;
}

void expect_same(const Profile& a, const Profile& b) {
  EXPECT_EQ(a.kind, b.kind);
  EXPECT_EQ(a.mu, b.mu);
  EXPECT_EQ(a.s, b.s);
  EXPECT_EQ(a.L, b.L);
  EXPECT_EQ(a.N, b.N);
  EXPECT_EQ(a.phi_minus, b.phi_minus);
  EXPECT_EQ(a.phi_plus, b.phi_plus);
  EXPECT_TRUE((a.z.array() == b.z.array()).all());
  EXPECT_TRUE((a.phi.array() == b.phi.array()).all());
  EXPECT_TRUE((a.dphi.array() == b.dphi.array()).all());
  EXPECT_TRUE((a.ddphi.array() == b.ddphi.array()).all());
}

PeriodicPattern small_pattern() {
  PeriodicPattern p = constant_pattern(1.2, -1.44, 4.0, 0.5);
  p.phi[3] = 0.25;
  p.layout = {1.0, 2.0, 1.0};
  p.layer_centers = {0.5, 2.5};
  p.total_spacing = 3.0;
  return p;
}

}  // namespace

TEST(ProfileIo, CsvRoundTripIsExact) {
  expect_same(front0(), profile_from_csv(profile_to_csv(front0())));
}

TEST(ProfileIo, BinaryRoundTripIsExact) {
  const std::string bytes = profile_to_binary(front0());
  EXPECT_EQ(bytes.substr(0, 8), "MKSLAB1\n");
  expect_same(front0(), profile_from_binary(bytes));
}

TEST(ProfileIo, LoadDetectsFormat) {
  const auto dir = std::filesystem::temp_directory_path() / "mkslab_io_test";
  write_file(dir / "p.csv", profile_to_csv(front0()));
  write_file(dir / "p.bin", profile_to_binary(front0()));
  expect_same(front0(), load_profile(dir / "p.csv"));
  expect_same(front0(), load_profile(dir / "p.bin"));
  std::filesystem::remove_all(dir);
}

TEST(ProfileIo, MalformedInputRaisesParseError) {
  try {
    profile_from_csv("# profile-v1\nz,phi\n1,oops\n");
    FAIL() << "no exception";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
  }
  EXPECT_THROW(profile_from_binary("MKSLAB1\n\x03"), Error);
  EXPECT_THROW(read_file("/nonexistent/mkslab/file.csv"), Error);
}

TEST(PatternIo, RoundTrips) {
  const PeriodicPattern p = small_pattern();
  for (const PeriodicPattern& q : {pattern_from_csv(pattern_to_csv(p)), pattern_from_binary(pattern_to_binary(p))}) {
    EXPECT_EQ(q.X, p.X);
    EXPECT_EQ(q.s, p.s);
    EXPECT_EQ(q.layout, p.layout);
    EXPECT_EQ(q.layer_centers, p.layer_centers);
    EXPECT_TRUE((q.phi.array() == p.phi.array()).all());
    EXPECT_TRUE((q.z.array() == p.z.array()).all());
  }
}

TEST(HillIo, RoundTrip) {
  HillSpectrum h;
  h.floquet = {-0.5, 0.25};
  h.eigenvalues = {{{1.0, -2.0}, {0.5, 0.0}}, {{-3.0, 0.125}}};
  const HillSpectrum r = hill_from_csv(hill_to_csv(h));
  ASSERT_EQ(r.floquet, h.floquet);
  ASSERT_EQ(r.eigenvalues.size(), 2u);
  EXPECT_EQ(r.eigenvalues[0], h.eigenvalues[0]);
  EXPECT_EQ(r.eigenvalues[1], h.eigenvalues[1]);
}

TEST(Plot, DeterministicSvg) {
  Plot pl{"t", "x", "y", {{"a", {0, 1, 2}, {1, 4, 9}, PlotStyle::Line}, {"b", {0, 2}, {3, 1}, PlotStyle::Scatter}}};
  const std::string a = emit_plot(pl), b = emit_plot(pl);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.rfind("<svg", 0), 0u);
  EXPECT_NE(a.find("</svg>"), std::string::npos);
  EXPECT_NE(a.find("<circle"), std::string::npos);
}

TEST(Plot, EmptyRaises) {
  try {
    emit_plot(Plot{"t", "x", "y", {{"nan", {0.0}, {std::nan("")}, PlotStyle::Line}}});
    FAIL() << "no exception";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PlotEmpty);
  }
}
