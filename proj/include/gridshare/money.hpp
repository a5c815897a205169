/*
 * Copyright 2026 the gridshare authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef GRIDSHARE_MONEY_HPP
#define GRIDSHARE_MONEY_HPP

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace gridshare {

// Energy values are processed on a 1e-6 kWh lattice. Prices carry two decimal
// places of a cent, so every price*energy product is an exact integer count of
// 1e-8 cent and sums of per-house costs match costs of summed aggregates with
// no rounding at all.
inline constexpr std::int64_t kMicroPerKwh = 1'000'000;

inline std::int64_t to_micro_kwh(double kwh) {
  if (!std::isfinite(kwh)) throw std::invalid_argument("energy value is not finite");
  return std::llround(kwh * static_cast<double>(kMicroPerKwh));
}

/// Snaps a kWh value onto the micro-kWh lattice.
inline double snap_energy(double kwh) {
  return static_cast<double>(to_micro_kwh(kwh)) / static_cast<double>(kMicroPerKwh);
}

/// Price with a resolution of 0.01 cent (per kWh, per kWh-day or per m2-day
/// depending on context). Non-negative.
class Price {
 public:
  constexpr Price() = default;

  static Price from_cents(double cents) {
    if (!std::isfinite(cents) || cents < 0)
      throw std::invalid_argument("price must be finite and non-negative");
    Price p;
    p.centicents_ = std::llround(cents * 100.0);
    return p;
  }
  static constexpr Price from_centicents(std::int64_t cc) {
    Price p;
    p.centicents_ = cc;
    return p;
  }

  constexpr std::int64_t centicents() const { return centicents_; }
  double cents() const { return static_cast<double>(centicents_) / 100.0; }
  std::string cents_string() const;  // two decimals

  friend constexpr bool operator==(Price a, Price b) { return a.centicents_ == b.centicents_; }
  friend constexpr bool operator!=(Price a, Price b) { return a.centicents_ != b.centicents_; }
  friend constexpr bool operator<(Price a, Price b) { return a.centicents_ < b.centicents_; }
  friend constexpr bool operator<=(Price a, Price b) { return a.centicents_ <= b.centicents_; }
  friend constexpr bool operator>(Price a, Price b) { return a.centicents_ > b.centicents_; }
  friend constexpr bool operator>=(Price a, Price b) { return a.centicents_ >= b.centicents_; }

 private:
  std::int64_t centicents_ = 0;
};

/// Signed fixed-point money; 1 unit = 1e-8 cent.
class Money {
 public:
  static constexpr std::int64_t kUnitsPerCent = 100'000'000;

  constexpr Money() = default;
  static constexpr Money from_units(std::int64_t u) {
    Money m;
    m.units_ = u;
    return m;
  }
  static Money from_cents(double cents) {
    if (!std::isfinite(cents)) throw std::invalid_argument("money value is not finite");
    return from_units(std::llround(cents * static_cast<double>(kUnitsPerCent)));
  }

  constexpr std::int64_t units() const { return units_; }
  double cents() const { return static_cast<double>(units_) / kUnitsPerCent; }
  double dollars() const { return cents() / 100.0; }

  /// "123.45" / "-0.07": dollars with two decimals, half away from zero.
  std::string dollars_string() const {
    std::int64_t cents_rounded = rounded_div(units_, kUnitsPerCent);
    bool neg = cents_rounded < 0;
    std::uint64_t a = neg ? static_cast<std::uint64_t>(-cents_rounded)
                          : static_cast<std::uint64_t>(cents_rounded);
    std::string s = std::to_string(a / 100) + ".";
    std::uint64_t frac = a % 100;
    s += static_cast<char>('0' + frac / 10);
    s += static_cast<char>('0' + frac % 10);
    return neg ? "-" + s : s;
  }

  /// Cents with four decimals (the export resolution for per-house shares).
  std::string cents_string() const {
    std::int64_t v = rounded_div(units_, 10'000);  // 1e-4 cent units
    bool neg = v < 0;
    std::uint64_t a = neg ? static_cast<std::uint64_t>(-v) : static_cast<std::uint64_t>(v);
    std::string frac = std::to_string(a % 10'000);
    frac.insert(0, 4 - frac.size(), '0');
    std::string s = std::to_string(a / 10'000) + "." + frac;
    return neg ? "-" + s : s;
  }

  constexpr Money operator-() const { return from_units(-units_); }
  constexpr Money& operator+=(Money o) {
    units_ += o.units_;
    return *this;
  }
  constexpr Money& operator-=(Money o) {
    units_ -= o.units_;
    return *this;
  }
  friend constexpr Money operator+(Money a, Money b) { return from_units(a.units_ + b.units_); }
  friend constexpr Money operator-(Money a, Money b) { return from_units(a.units_ - b.units_); }
  friend constexpr Money operator*(Money a, std::int64_t k) { return from_units(a.units_ * k); }
  friend constexpr bool operator==(Money a, Money b) { return a.units_ == b.units_; }
  friend constexpr bool operator!=(Money a, Money b) { return a.units_ != b.units_; }
  friend constexpr bool operator<(Money a, Money b) { return a.units_ < b.units_; }
  friend constexpr bool operator<=(Money a, Money b) { return a.units_ <= b.units_; }
  friend constexpr bool operator>(Money a, Money b) { return a.units_ > b.units_; }
  friend constexpr bool operator>=(Money a, Money b) { return a.units_ >= b.units_; }

 private:
  static constexpr std::int64_t rounded_div(std::int64_t n, std::int64_t d) {
    // round half away from zero
    return n >= 0 ? (n + d / 2) / d : -((-n + d / 2) / d);
  }

  std::int64_t units_ = 0;
};

/// Exact cost of `kwh` at `price`: integer centicents x integer micro-kWh.
/// `kwh` may be negative (used for signed net positions).
inline Money energy_cost(Price price, double kwh) {
  return Money::from_units(price.centicents() * to_micro_kwh(kwh));
}

inline std::string Price::cents_string() const {
  bool neg = centicents_ < 0;
  std::uint64_t a = neg ? static_cast<std::uint64_t>(-centicents_)
                        : static_cast<std::uint64_t>(centicents_);
  std::string s = std::to_string(a / 100) + ".";
  std::uint64_t frac = a % 100;
  s += static_cast<char>('0' + frac / 10);
  s += static_cast<char>('0' + frac % 10);
  return neg ? "-" + s : s;
}

}  // namespace gridshare

#endif  // GRIDSHARE_MONEY_HPP
