#include <algorithm>
#include <cmath>
#include <sstream>

#include "mkslab/profile.hpp"

namespace mkslab {

namespace {

struct Marcher {
  const ContinuationOptions& opt;
  ContinuationResult& out;
  Profile current;
  std::optional<Profile> previous;
  double step;

  // Advances `current` to exactly `target`; false if the step collapsed.
  bool advance_to(double target) {
    const double dir = target > current.mu ? 1.0 : -1.0;
    while (current.mu != target) {
      const double remaining = std::abs(target - current.mu);
      const double h = std::min(step, remaining);
      const double mu_next = h == remaining ? target : current.mu + dir * h;
      double s_guess = current.s;
      if (previous) {
        const double slope = (current.s - previous->s) / (current.mu - previous->mu);
        s_guess += slope * (mu_next - current.mu);
      }
      try {
        CollocationOptions co = opt.collocation;
        co.phase_anchor = current.phase_anchor;
        Profile next = collocate(current.kind, mu_next, s_guess, seed_from_profile(current), co);
        previous = std::move(current);
        current = std::move(next);
        out.path.push_back(current);
        step = std::min(opt.max_step, 2.0 * step);
      } catch (const Error& e) {
        step *= 0.5;
        if (step < opt.min_step) {
          std::ostringstream msg;
          msg << "continuation stalled at mu=" << current.mu << " heading to " << target
              << ": " << e.what();
          out.diagnostics = msg.str();
          return false;
        }
      }
    }
    return true;
  }
};

}  // namespace

ContinuationResult continue_in_mu(std::span<const double> mu_grid, const Profile& seed,
                                  const ContinuationOptions& options) {
  if (!(options.max_step > 0.0) || !(options.min_step > 0.0) ||
      options.min_step > options.max_step) {
    fail(ErrorCode::InvalidArgument, "continue_in_mu: need 0 < min_step <= max_step");
  }
  std::vector<double> up, down;
  for (double m : mu_grid) {
    if (!std::isfinite(m)) fail(ErrorCode::InvalidArgument, "continue_in_mu: non-finite mu");
    (m >= seed.mu ? up : down).push_back(m);
  }
  std::sort(up.begin(), up.end());
  std::sort(down.begin(), down.end(), std::greater<>());
  up.erase(std::unique(up.begin(), up.end()), up.end());
  down.erase(std::unique(down.begin(), down.end()), down.end());

  ContinuationResult out;
  out.last_mu = seed.mu;
  for (const auto* branch : {&down, &up}) {
    Marcher m{options, out, seed, std::nullopt, options.max_step};
    for (double target : *branch) {
      if (!m.advance_to(target)) {
        out.terminated = true;
        out.last_mu = m.current.mu;
        break;
      }
      out.profiles.push_back(m.current);
    }
  }
  std::sort(out.profiles.begin(), out.profiles.end(),
            [](const Profile& a, const Profile& b) { return a.mu < b.mu; });
  return out;
}

}  // namespace mkslab
