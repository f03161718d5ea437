#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "hswap/core/error.hpp"
#include "nlohmann/json.hpp"

namespace hswap::losses {

struct Keypoint {
  std::string name;
  double x = 0.0;  // normalized column in [0,1]
  double y = 0.0;  // normalized row in [0,1]
};

// Named 2-D points with symmetric lower/upper pairs for lips and eyelids.
class KeypointSet {
 public:
  int add(const std::string& name, double x, double y) {
    check_arg(std::isfinite(x) && std::isfinite(y), "keypoint coordinates must be finite");
    pts_.push_back({name, x, y});
    return static_cast<int>(pts_.size()) - 1;
  }

  // Registers a symmetric (lower, upper) pair. A lower point may appear in
  // exactly one pair.
  void add_pair(int lower, int upper) {
    check_arg(lower >= 0 && lower < size() && upper >= 0 && upper < size(),
              "keypoint pair index out of range");
    for (const auto& [lo, up] : pairs_)
      check_arg(lo != lower, "lower keypoint already paired");
    pairs_.emplace_back(lower, upper);
  }

  int size() const { return static_cast<int>(pts_.size()); }
  const Keypoint& point(int i) const { return pts_[static_cast<std::size_t>(i)]; }
  const std::vector<Keypoint>& points() const { return pts_; }
  const std::vector<std::pair<int, int>>& pairs() const { return pairs_; }

  bool same_structure(const KeypointSet& o) const {
    return pts_.size() == o.pts_.size() && pairs_ == o.pairs_;
  }

  KeypointSet translated(double dx, double dy) const {
    KeypointSet out = *this;
    for (auto& p : out.pts_) {
      p.x += dx;
      p.y += dy;
    }
    return out;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["points"] = nlohmann::json::array();
    for (const auto& p : pts_) j["points"].push_back({{"name", p.name}, {"x", p.x}, {"y", p.y}});
    j["pairs"] = nlohmann::json::array();
    for (const auto& [lo, up] : pairs_) j["pairs"].push_back({lo, up});
    return j;
  }

  static KeypointSet from_json(const nlohmann::json& j) {
    KeypointSet out;
    for (const auto& p : j.at("points"))
      out.add(p.at("name").get<std::string>(), p.at("x").get<double>(), p.at("y").get<double>());
    for (const auto& pr : j.at("pairs")) out.add_pair(pr.at(0).get<int>(), pr.at(1).get<int>());
    return out;
  }

 private:
  std::vector<Keypoint> pts_;
  std::vector<std::pair<int, int>> pairs_;
};

}  // namespace hswap::losses
