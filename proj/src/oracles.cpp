#include "deepbarrier/oracles.hpp"

#include "deepbarrier/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace deepbarrier {

namespace {

constexpr double kContinuityShift = 0.5826;

struct CallParts {
  double price;
  double delta;
};

// N(a) - N(b), taken on the tail side where both arguments are positive.
double cdf_diff(double a, double b) noexcept {
  return (a > 0.0 && b > 0.0) ? normal_cdf(-b) - normal_cdf(-a) : normal_cdf(a) - normal_cdf(b);
}

// Value and delta of a European claim paying (S_T - K)^+ 1{S_T < U}.
CallParts capped_call(double spot, double strike, double barrier, double rate, double vol, double maturity) {
  if (strike >= barrier) return {0.0, 0.0};
  const double sd = vol * std::sqrt(maturity);
  const double drift = (rate + 0.5 * vol * vol) * maturity;
  const double d1k = (std::log(spot / strike) + drift) / sd;
  const double d1u = (std::log(spot / barrier) + drift) / sd;
  const double disc = std::exp(-rate * maturity);
  const double price = spot * cdf_diff(d1k, d1u) - strike * disc * cdf_diff(d1k - sd, d1u - sd);
  const double delta = cdf_diff(d1k, d1u) - (barrier - strike) * disc * normal_pdf(d1u - sd) / (spot * sd);
  return {price, delta};
}

// E[exp(-r tau) 1{tau <= T}] for the first passage of GBM up to the barrier, and its delta.
CallParts discounted_hit(double spot, double barrier, double rate, double vol, double maturity) {
  const double var = vol * vol;
  const double mu = (rate - 0.5 * var) / var;
  const double lambda = std::sqrt(mu * mu + 2.0 * rate / var);
  const double sd = vol * std::sqrt(maturity);
  const double ratio = barrier / spot;
  const double z = std::log(ratio) / sd + lambda * sd;
  const double a = std::pow(ratio, mu + lambda);
  const double b = std::pow(ratio, mu - lambda);
  const double shifted = -z + 2.0 * lambda * sd;
  const double value = a * normal_cdf(-z) + b * normal_cdf(shifted);
  const double delta = -(mu + lambda) * a / spot * normal_cdf(-z) + a * normal_pdf(z) / (spot * sd) -
                       (mu - lambda) * b / spot * normal_cdf(shifted) + b * normal_pdf(shifted) / (spot * sd);
  return {value, delta};
}

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) throw ValidationError(std::string(name) + " must be > 0");
}

}  // namespace

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) noexcept { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

VanillaQuote bs_vanilla(double spot, double strike, double rate, double vol, double maturity, OptionType type) {
  require_positive(spot, "spot");
  require_positive(strike, "strike");
  if (!(vol >= 0.0)) throw ValidationError("vol must be >= 0");
  VanillaQuote q{0.0, 0.0, spot, strike, rate, vol, maturity};
  const bool call = type == OptionType::Call;

  if (maturity <= 0.0) {
    q.price = call ? std::max(spot - strike, 0.0) : std::max(strike - spot, 0.0);
    if (spot > strike) q.delta = call ? 1.0 : 0.0;
    else if (spot < strike) q.delta = call ? 0.0 : -1.0;
    else q.delta = call ? 0.5 : -0.5;
    return q;
  }

  const double disc_strike = strike * std::exp(-rate * maturity);
  const double sd = vol * std::sqrt(maturity);
  if (sd == 0.0) {
    const double call_price = std::max(spot - disc_strike, 0.0);
    const double call_delta = spot > disc_strike ? 1.0 : 0.0;
    q.price = call ? call_price : call_price - spot + disc_strike;
    q.delta = call ? call_delta : call_delta - 1.0;
    return q;
  }

  const double d1 = (std::log(spot / strike) + (rate + 0.5 * vol * vol) * maturity) / sd;
  const double d2 = d1 - sd;
  if (call) {
    q.price = spot * normal_cdf(d1) - disc_strike * normal_cdf(d2);
    q.delta = normal_cdf(d1);
  } else {
    q.price = disc_strike * normal_cdf(-d2) - spot * normal_cdf(-d1);
    q.delta = normal_cdf(d1) - 1.0;
  }
  return q;
}

BarrierQuote barrier_up_out_call(double spot, double strike, double barrier, double rate, double vol,
                                 double maturity, double rebate) {
  require_positive(spot, "spot");
  require_positive(strike, "strike");
  require_positive(barrier, "barrier");
  if (!(vol >= 0.0)) throw ValidationError("vol must be >= 0");
  BarrierQuote q{0.0, 0.0, spot, strike, barrier, rate, vol, maturity, rebate};

  if (spot >= barrier) {
    q.price = rebate;
    return q;
  }
  if (maturity <= 0.0) {
    q.price = std::max(spot - strike, 0.0);
    q.delta = spot > strike ? 1.0 : 0.0;
    return q;
  }
  if (vol == 0.0) {
    // Deterministic path S e^{rt}: hits the barrier at tau = ln(U/S) / r if tau <= T.
    const double tau = rate > 0.0 ? std::log(barrier / spot) / rate : maturity + 1.0;
    if (tau <= maturity) {
      q.price = rebate * std::exp(-rate * tau);
      q.delta = q.price / spot;
    } else {
      const double disc_strike = strike * std::exp(-rate * maturity);
      q.price = std::max(spot - disc_strike, 0.0);
      q.delta = spot > disc_strike ? 1.0 : 0.0;
    }
    return q;
  }

  const double image = barrier * barrier / spot;
  const double power = 2.0 * rate / (vol * vol) - 1.0;
  const double weight = std::pow(barrier / spot, power);
  const CallParts direct = capped_call(spot, strike, barrier, rate, vol, maturity);
  const CallParts reflected = capped_call(image, strike, barrier, rate, vol, maturity);
  q.price = direct.price - weight * reflected.price;
  // d/dS [w(S) f(U^2/S)] = -p/S w f + w f'(U^2/S) (-U^2/S^2)
  q.delta = direct.delta - (-power / spot * weight * reflected.price - weight * reflected.delta * image / spot);

  if (rebate != 0.0) {
    const CallParts hit = discounted_hit(spot, barrier, rate, vol, maturity);
    q.price += rebate * hit.price;
    q.delta += rebate * hit.delta;
  }
  return q;
}

double discretely_monitored_upper(double barrier, double vol, double dt) noexcept {
  return barrier * std::exp(kContinuityShift * vol * std::sqrt(dt));
}

double bridge_no_breach_prob(double x_start, double x_end, double barrier, double vol, double dt) noexcept {
  if (x_start >= barrier || x_end >= barrier) return 0.0;
  if (dt <= 0.0 || vol == 0.0) return 1.0;
  const double exponent = 2.0 * std::log(barrier / x_start) * std::log(barrier / x_end) / (vol * vol * dt);
  return -std::expm1(-exponent);
}

double bridge_no_breach_prob_lower(double x_start, double x_end, double barrier, double vol, double dt) noexcept {
  if (x_start <= barrier || x_end <= barrier) return 0.0;
  if (dt <= 0.0 || vol == 0.0) return 1.0;
  const double exponent = 2.0 * std::log(x_start / barrier) * std::log(x_end / barrier) / (vol * vol * dt);
  return -std::expm1(-exponent);
}

McEstimate mc_price(const MarketModel& model, const InstrumentSpec& instr, const TimeGrid& grid,
                    const Eigen::VectorXd& spot, const McOptions& options) {
  model.validate();
  grid.validate();
  instr.validate();
  if (options.paths < 1) throw ValidationError("mc paths must be >= 1");
  if (spot.size() != model.dim) throw ValidationError("spot size must equal the model dimension");

  const BarrierSpec spec = effective_barrier(instr.barrier, model.vol, grid.dt());
  const bool upper_only = spec.needs_upper() && !spec.needs_lower();
  if (options.bridge) {
    const bool single = spec.needs_upper() != spec.needs_lower();
    const auto& schedule = upper_only ? spec.upper : spec.lower;
    if (!single || !schedule->is_constant() || !spec.basket_weights.empty()) {
      throw ValidationError("bridge weighting needs a single constant barrier on one coordinate");
    }
  }
  const double bridge_level = options.bridge ? (upper_only ? spec.upper->levels[0] : spec.lower->levels[0]) : 0.0;

  const int n = grid.steps;
  const double dt = grid.dt();
  const double r = model.rate;
  const bool knock_in = spec.knock_in();
  const long chunk = std::max<long>(1, options.chunk);

  // Welford accumulation in path order.
  double mean = 0.0;
  double m2 = 0.0;
  long count = 0;
  auto accumulate = [&](double v) {
    ++count;
    const double delta = v - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (v - mean);
  };

  for (long start = 0; start < options.paths; start += chunk) {
    const long width = std::min(chunk, options.paths - start);
    const PathBatch paths =
        simulate_paths(model, grid, fixed_x0(width, spot), options.seed, static_cast<std::uint64_t>(start));
    for (Eigen::Index p = 0; p < width; ++p) {
      if (!options.bridge) {
        double trig = spec.monitor_at_t0 && condition(spec, 0.0, paths.levels[0].col(p)) ? 1.0 : 0.0;
        int hit = trig != 0.0 ? 0 : -1;
        for (int i = 1; i <= n && hit < 0; ++i) {
          const bool check = i < n || spec.active_at_maturity;
          if (trig_update(0.0, spec, grid.time(i), paths.levels[static_cast<std::size_t>(i)].col(p), check) != 0.0) {
            hit = i;
          }
        }
        const int stop = hit < 0 ? n : hit;
        const double t_stop = grid.time(stop);
        const double payoff = terminal_payoff(instr, model, hit >= 0, t_stop,
                                              paths.levels[static_cast<std::size_t>(stop)].col(p));
        accumulate(payoff * std::exp(-r * t_stop));
        continue;
      }

      auto distance_log = [&](double x) {
        return upper_only ? std::log(bridge_level / x) : std::log(x / bridge_level);
      };
      auto breached = [&](double x) { return upper_only ? x >= bridge_level : x <= bridge_level; };
      const double denom = model.vol * model.vol * dt;
      double survival = 1.0;
      double rebate_value = 0.0;
      double x_prev = paths.level(p, 0);
      double log_prev = breached(x_prev) ? 0.0 : distance_log(x_prev);
      if (breached(x_prev)) {
        survival = 0.0;
        if (!knock_in) rebate_value = spec.rebate;
      }
      for (int i = 1; i <= n && survival > 0.0; ++i) {
        const double x_next = paths.level(p, i);
        double prob = 0.0;
        double log_next = 0.0;
        if (!breached(x_next)) {
          log_next = distance_log(x_next);
          prob = denom > 0.0 ? -std::expm1(-2.0 * log_prev * log_next / denom) : 1.0;
        }
        if (!knock_in && spec.rebate != 0.0) {
          rebate_value += survival * (1.0 - prob) * spec.rebate * std::exp(-r * grid.time(i));
        }
        survival *= prob;
        log_prev = log_next;
      }
      const double final_payoff = vanilla_payoff(instr, paths.level(p, n)) * std::exp(-r * grid.maturity);
      accumulate(knock_in ? (1.0 - survival) * final_payoff : survival * final_payoff + rebate_value);
    }
  }

  McEstimate est;
  est.price = mean;
  est.paths = count;
  const double paths = static_cast<double>(count);
  est.std_error = count > 1 ? std::sqrt(std::max(m2, 0.0) / (paths - 1.0) / paths) : 0.0;
  return est;
}

}  // namespace deepbarrier
