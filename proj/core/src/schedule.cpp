#include "demoforge/diffusion/schedule.hpp"

#include <cmath>

#include "binary_io.hpp"
#include "decimal.hpp"
#include "demoforge/error.hpp"
#include "json.hpp"

namespace demoforge {

DiffusionSchedule make_schedule(int T, double beta_start, double beta_end) {
  if (T < 1) throw ConfigError("diffusion needs at least one step");
  if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0)) {
    throw ConfigError("beta range must satisfy 0 < beta_start <= beta_end < 1");
  }
  DiffusionSchedule s;
  s.T = T;
  s.beta_start = beta_start;
  s.beta_end = beta_end;
  const auto n = static_cast<std::size_t>(T) + 1;
  s.beta.assign(n, 0.0);
  s.alpha.assign(n, 1.0);
  s.sigma.assign(n, 0.0);
  s.posterior_var.assign(n, 0.0);
  double alpha_bar = 1.0;
  for (int t = 1; t <= T; ++t) {
    const double frac = T == 1 ? 0.0 : static_cast<double>(t - 1) / static_cast<double>(T - 1);
    const double beta = beta_start + (beta_end - beta_start) * frac;
    const double prev_bar = alpha_bar;
    alpha_bar *= 1.0 - beta;
    const auto i = static_cast<std::size_t>(t);
    s.beta[i] = beta;
    s.alpha[i] = std::sqrt(alpha_bar);
    s.sigma[i] = std::sqrt(1.0 - alpha_bar);
    s.posterior_var[i] = beta * (1.0 - prev_bar) / (1.0 - alpha_bar);
  }
  return s;
}

NoisedSample forward_noise(const DiffusionSchedule& schedule, const nn::Vector& x0, int t, Rng& rng) {
  if (t < 0 || t > schedule.T) throw ShapeError("timestep " + std::to_string(t) + " outside [0, T]");
  NoisedSample out;
  out.eps.resize(x0.size());
  for (Eigen::Index i = 0; i < x0.size(); ++i) out.eps(i) = standard_normal(rng);
  const auto ti = static_cast<std::size_t>(t);
  out.x_t = schedule.alpha[ti] * x0 + schedule.sigma[ti] * out.eps;
  return out;
}

nn::Vector timestep_embedding(int t, int dim) {
  if (dim <= 0 || dim % 2 != 0) throw InvalidSpecError("timestep embedding dim must be positive and even");
  const int half = dim / 2;
  nn::Vector e(dim);
  for (int i = 0; i < half; ++i) {
    const double freq = std::exp(-std::log(10000.0) * static_cast<double>(i) / static_cast<double>(half));
    e(i) = std::sin(t * freq);
    e(half + i) = std::cos(t * freq);
  }
  return e;
}

void save_schedule_json(const std::filesystem::path& path, const DiffusionSchedule& s) {
  auto arr = [](const std::vector<double>& v) {
    auto a = nlohmann::ordered_json::array();
    for (double x : v) a.push_back(detail::exact_decimal(x));
    return a;
  };
  nlohmann::ordered_json j;
  j["T"] = s.T;
  j["beta_start"] = detail::exact_decimal(s.beta_start);
  j["beta_end"] = detail::exact_decimal(s.beta_end);
  j["beta"] = arr(s.beta);
  j["alpha"] = arr(s.alpha);
  j["sigma"] = arr(s.sigma);
  j["posterior_var"] = arr(s.posterior_var);
  detail::write_file(path.string(), j.dump(1) + "\n");
}

DiffusionSchedule load_schedule_json(const std::filesystem::path& path) {
  try {
    const auto j = nlohmann::json::parse(detail::read_file(path.string()));
    return make_schedule(j.at("T").get<int>(), std::stod(j.at("beta_start").get<std::string>()),
                         std::stod(j.at("beta_end").get<std::string>()));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed schedule.json: " + std::string(e.what()));
  }
}

}  // namespace demoforge
