#pragma once

#include "deepbarrier/barrier.hpp"
#include "deepbarrier/sde_engine.hpp"

#include <cstdint>

namespace deepbarrier {

struct VanillaQuote {
  double price = 0.0;
  double delta = 0.0;
  double spot = 0.0, strike = 0.0, rate = 0.0, vol = 0.0, maturity = 0.0;
};

struct BarrierQuote {
  double price = 0.0;
  double delta = 0.0;
  double spot = 0.0, strike = 0.0, barrier = 0.0, rate = 0.0, vol = 0.0, maturity = 0.0, rebate = 0.0;
};

double normal_cdf(double x) noexcept;
double normal_pdf(double x) noexcept;

/// Black-Scholes call or put with delta. maturity <= 0 gives the intrinsic
/// value; vol == 0 gives the deterministic forward limit.
VanillaQuote bs_vanilla(double spot, double strike, double rate, double vol, double maturity,
                        OptionType type = OptionType::Call);

/// Continuously monitored up-and-out call with a rebate paid at the hit.
/// The barrier part uses the method of images on the capped payoff
/// (S_T - K)^+ 1{S_T < U}; the rebate part is the first-passage Laplace
/// transform of the hitting time.
BarrierQuote barrier_up_out_call(double spot, double strike, double barrier, double rate, double vol,
                                 double maturity, double rebate = 0.0);

/// Barrier level at which the continuous formula approximates the same
/// contract monitored on a grid of width dt (upper barriers move up).
double discretely_monitored_upper(double barrier, double vol, double dt) noexcept;

/// Probability that a geometric Brownian bridge between two observed levels
/// stays strictly below an upper barrier over an interval of length dt.
double bridge_no_breach_prob(double x_start, double x_end, double barrier, double vol, double dt) noexcept;

/// Same for a lower barrier.
double bridge_no_breach_prob_lower(double x_start, double x_end, double barrier, double vol, double dt) noexcept;

struct McEstimate {
  double price = 0.0;
  double std_error = 0.0;
  long paths = 0;
};

struct McOptions {
  long paths = 100000;
  bool bridge = false;
  std::uint64_t seed = 1;
  /// Paths simulated per chunk; results do not depend on it.
  long chunk = 8192;
};

/// Risk-neutral Monte-Carlo reference price from a fixed spot. Without the
/// bridge, each path pays g_B at the first discrete breach (or maturity)
/// discounted with exp(-r tau). With the bridge, single-constant-barrier
/// products weight payoffs by per-interval no-breach probabilities.
McEstimate mc_price(const MarketModel& model, const InstrumentSpec& instr, const TimeGrid& grid,
                    const Eigen::VectorXd& spot, const McOptions& options);

}  // namespace deepbarrier
