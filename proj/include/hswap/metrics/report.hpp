#pragma once

#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "nlohmann/json.hpp"

namespace hswap::metrics {

// Per-pair metric rows plus aggregates. Column names match the published
// table headers; FID is a per-split aggregate and appears only in the
// aggregate rows and the summary.
struct MetricReport {
  static const std::vector<std::string>& columns() {
    static const std::vector<std::string> cols = {"CSIM",  "LPIPS", "PSNR",
                                                  "SSIM",  "FID",   "AKD",
                                                  "PSNR_inpainting", "PSNR_head"};
    return cols;
  }

  struct Row {
    std::string pair_id;
    std::string split;  // "self" or "cross"
    std::map<std::string, double> values;
  };

  std::vector<Row> rows;
  std::map<std::string, double> split_fid;          // split -> FID
  std::map<std::string, std::string> provenance;    // metric -> provider name

  void add(const std::string& pair_id, const std::string& split,
           std::map<std::string, double> values) {
    rows.push_back({pair_id, split, std::move(values)});
  }

  std::map<std::string, double> mean(const std::string& split) const {
    std::map<std::string, double> acc;
    std::map<std::string, int> count;
    for (const auto& r : rows) {
      if (r.split != split) continue;
      for (const auto& [k, v] : r.values) {
        acc[k] += v;
        count[k] += 1;
      }
    }
    for (auto& [k, v] : acc) v /= count[k];
    return acc;
  }

  std::map<std::string, double> stddev(const std::string& split) const {
    const auto m = mean(split);
    std::map<std::string, double> acc;
    std::map<std::string, int> count;
    for (const auto& r : rows) {
      if (r.split != split) continue;
      for (const auto& [k, v] : r.values) {
        const double d = v - m.at(k);
        acc[k] += d * d;
        count[k] += 1;
      }
    }
    for (auto& [k, v] : acc) v = std::sqrt(v / count[k]);
    return acc;
  }

  static std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
  }

  std::string to_csv() const {
    std::string out = "pair,split";
    for (const auto& c : columns()) out += "," + c;
    out += "\n";
    auto emit = [&](const std::string& id, const std::string& split,
                    const std::map<std::string, double>& values) {
      out += id + "," + split;
      for (const auto& c : columns()) {
        out += ",";
        auto it = values.find(c);
        if (it != values.end()) out += fmt(it->second);
      }
      out += "\n";
    };
    for (const auto& r : rows) emit(r.pair_id, r.split, r.values);
    for (const auto& split : {"self", "cross"}) {
      bool any = false;
      for (const auto& r : rows) any = any || r.split == split;
      if (!any) continue;
      auto m = mean(split);
      auto it = split_fid.find(split);
      if (it != split_fid.end()) m["FID"] = it->second;
      emit("aggregate_mean", split, m);
      emit("aggregate_std", split, stddev(split));
    }
    return out;
  }

  nlohmann::json summary_json() const {
    nlohmann::json j;
    for (const auto& split : {"self", "cross"}) {
      bool any = false;
      for (const auto& r : rows) any = any || r.split == split;
      if (!any) continue;
      auto m = mean(split);
      auto s = stddev(split);
      nlohmann::json js;
      for (const auto& [k, v] : m) js[k] = {{"mean", v}, {"std", s.at(k)}};
      auto it = split_fid.find(split);
      if (it != split_fid.end()) js["FID"] = {{"mean", it->second}, {"std", 0.0}};
      j[split] = js;
    }
    nlohmann::json prov = nlohmann::json::object();
    for (const auto& [k, v] : provenance) prov[k] = v;
    j["providers"] = prov;
    j["pairs"] = rows.size();
    return j;
  }
};

}  // namespace hswap::metrics
