// Copyright 2026 The qkdplan Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Joint realizations of secret-key rates and weather.
//
// A scenario fixes the rate of every request and one global weather state.
// Rates are independent and uniform over each request's support; weather is
// uniform unless explicit probabilities are given. Probabilities are exact.

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "qkdplan/rational.hpp"

namespace qkdplan {

enum class Weather { kClear, kCloudy };

inline std::string_view weather_name(Weather w) { return w == Weather::kClear ? "clear" : "cloudy"; }

inline Weather parse_weather(std::string_view text) {
  if (text == "clear") return Weather::kClear;
  if (text == "cloudy") return Weather::kCloudy;
  throw ParseError("unknown weather state '" + std::string(text) + "'");
}

struct WeatherOutcome {
  Weather state = Weather::kClear;
  Rational probability;

  friend bool operator==(const WeatherOutcome&, const WeatherOutcome&) = default;
};

// Rate support per request id.
using RateSupport = std::map<int, std::vector<Rational>>;

struct Scenario {
  std::map<int, Rational> rates_kbps;
  Weather weather = Weather::kClear;
  Rational probability;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct ScenarioSet {
  std::vector<Scenario> scenarios;
  RateSupport rate_support;
  std::vector<WeatherOutcome> weather_support;

  std::size_t size() const { return scenarios.size(); }
  const Scenario& operator[](std::size_t i) const { return scenarios[i]; }

  friend bool operator==(const ScenarioSet&, const ScenarioSet&) = default;
};

inline constexpr std::size_t kDefaultScenarioLimit = 100000;

// Satellites serve keys only under a clear sky.
inline bool satellite_available(const Scenario& scenario) {
  return scenario.weather == Weather::kClear;
}

// Uniform weather over the given states.
inline std::vector<WeatherOutcome> uniform_weather(const std::vector<Weather>& states) {
  std::vector<WeatherOutcome> out;
  for (Weather w : states) out.push_back({w, Rational(1, states.size())});
  return out;
}

namespace detail {

inline void check_supports(const RateSupport& rates, const std::vector<WeatherOutcome>& weather) {
  if (rates.empty()) throw ValidationError("scenario space needs at least one request");
  for (const auto& [id, support] : rates) {
    if (support.empty()) {
      throw ValidationError("request " + std::to_string(id) + " has an empty rate support");
    }
  }
  if (weather.empty()) throw ValidationError("weather support is empty");
  Rational total = 0;
  for (std::size_t i = 0; i < weather.size(); ++i) {
    if (weather[i].probability <= 0) {
      throw ValidationError("weather probabilities must be positive");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (weather[j].state == weather[i].state) {
        throw ValidationError("weather state listed twice");
      }
    }
    total += weather[i].probability;
  }
  if (total != 1) throw ValidationError("weather probabilities sum to " + format_rational(total));
}

}  // namespace detail

// Full Cartesian product of per-request rates and the weather states. Order:
// request ids ascending with the first request varying slowest, weather last.
inline ScenarioSet enumerate_scenarios(const RateSupport& rates,
                                       const std::vector<WeatherOutcome>& weather,
                                       std::size_t limit = kDefaultScenarioLimit) {
  detail::check_supports(rates, weather);
  Integer count = weather.size();
  Integer rate_combinations = 1;
  for (const auto& [id, support] : rates) rate_combinations *= support.size();
  count *= rate_combinations;
  if (count > Integer(static_cast<unsigned long>(limit))) {
    throw ValidationError("scenario space has " + count.get_str() + " scenarios, above the limit of " +
                          std::to_string(limit) + "; use sampling instead");
  }

  ScenarioSet set;
  set.rate_support = rates;
  set.weather_support = weather;
  const Rational rate_probability(Integer(1), rate_combinations);

  std::vector<int> ids;
  std::vector<const std::vector<Rational>*> supports;
  for (const auto& [id, support] : rates) {
    ids.push_back(id);
    supports.push_back(&support);
  }
  std::vector<std::size_t> digit(ids.size(), 0);
  while (true) {
    for (const WeatherOutcome& w : weather) {
      Scenario s;
      for (std::size_t k = 0; k < ids.size(); ++k) s.rates_kbps[ids[k]] = (*supports[k])[digit[k]];
      s.weather = w.state;
      s.probability = rate_probability * w.probability;
      set.scenarios.push_back(std::move(s));
    }
    std::size_t k = ids.size();
    while (k > 0) {
      --k;
      if (++digit[k] < supports[k]->size()) break;
      digit[k] = 0;
      if (k == 0) return set;
    }
    if (ids.empty()) return set;
  }
}

// n i.i.d. draws; identical draws are merged and carry count/n probability.
// Output is sorted by (rates, weather) so it depends only on the multiset of draws.
inline ScenarioSet sample_scenarios(const RateSupport& rates,
                                    const std::vector<WeatherOutcome>& weather,
                                    std::uint64_t seed, std::size_t n) {
  detail::check_supports(rates, weather);
  if (n == 0) throw ValidationError("sample size must be at least 1");

  // Weather is drawn by exact inverse-CDF on a common denominator.
  Integer common = 1;
  for (const WeatherOutcome& w : weather) mpz_lcm(common.get_mpz_t(), common.get_mpz_t(),
                                                   w.probability.get_den_mpz_t());
  if (!common.fits_ulong_p()) throw ValidationError("weather probabilities are too fine to sample");
  std::vector<std::uint64_t> cumulative;
  std::uint64_t acc = 0;
  for (const WeatherOutcome& w : weather) {
    Integer ticks = w.probability.get_num() * (common / w.probability.get_den());
    acc += ticks.get_ui();
    cumulative.push_back(acc);
  }

  std::mt19937_64 rng(seed);
  std::map<std::tuple<std::map<int, Rational>, Weather>, std::size_t> counts;
  for (std::size_t draw = 0; draw < n; ++draw) {
    std::map<int, Rational> realized;
    for (const auto& [id, support] : rates) {
      std::uniform_int_distribution<std::size_t> pick(0, support.size() - 1);
      realized[id] = support[pick(rng)];
    }
    std::uniform_int_distribution<std::uint64_t> tick(0, acc - 1);
    std::uint64_t t = tick(rng);
    std::size_t w = 0;
    while (t >= cumulative[w]) ++w;
    ++counts[{std::move(realized), weather[w].state}];
  }

  ScenarioSet set;
  set.rate_support = rates;
  set.weather_support = weather;
  for (auto& [key, count] : counts) {
    Scenario s;
    s.rates_kbps = std::get<0>(key);
    s.weather = std::get<1>(key);
    s.probability = Rational(count, n);
    s.probability.canonicalize();
    set.scenarios.push_back(std::move(s));
  }
  return set;
}

inline Rational total_probability(const ScenarioSet& set) {
  Rational total = 0;
  for (const Scenario& s : set.scenarios) total += s.probability;
  return total;
}

}  // namespace qkdplan
