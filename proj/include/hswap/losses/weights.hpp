#pragma once

#include <map>
#include <string>

#include "hswap/core/error.hpp"

namespace hswap::losses {

// Loss term weights for both stages. Defaults are the published values; all
// are overridable through config keys named lambda_* (aligner.lambda_adv,
// blender.lambda_adv, ...).
struct LossWeights {
  // aligner stage
  double lambda_adv = 0.1;
  double lambda_fm = 10.0;
  double lambda_l1 = 30.0;
  double lambda_perc_vgg = 0.01;
  double lambda_perc_id = 2e-3;
  double lambda_cos_id = 0.01;
  double lambda_dice = 1.0;
  double lambda_emo = 1.0;
  double lambda_kpt = 30.0;
  double lambda_gaze = 0.5;
  // blender stage
  double blender_lambda_adv = 1.0;
  double blender_lambda_l1 = 1.0;
  double blender_lambda_perc_vgg = 0.01;
  double blender_lambda_c = 1.0;
  double blender_lambda_reg = 1.0;

  void validate() const {
    const double all[] = {lambda_adv,  lambda_fm,   lambda_l1,   lambda_perc_vgg,
                          lambda_perc_id, lambda_cos_id, lambda_dice, lambda_emo,
                          lambda_kpt,  lambda_gaze, blender_lambda_adv, blender_lambda_l1,
                          blender_lambda_perc_vgg, blender_lambda_c, blender_lambda_reg};
    for (double v : all) check_arg(v >= 0.0, "loss weights must be nonnegative");
  }

  // Override from flat key/value entries: "aligner.lambda_adv", ...
  void apply_overrides(const std::map<std::string, double>& kv) {
    auto set = [&](const std::string& key, double& slot) {
      auto it = kv.find(key);
      if (it != kv.end()) slot = it->second;
    };
    set("aligner.lambda_adv", lambda_adv);
    set("aligner.lambda_fm", lambda_fm);
    set("aligner.lambda_l1", lambda_l1);
    set("aligner.lambda_perc_vgg", lambda_perc_vgg);
    set("aligner.lambda_perc_id", lambda_perc_id);
    set("aligner.lambda_cos_id", lambda_cos_id);
    set("aligner.lambda_dice", lambda_dice);
    set("aligner.lambda_emo", lambda_emo);
    set("aligner.lambda_kpt", lambda_kpt);
    set("aligner.lambda_gaze", lambda_gaze);
    set("blender.lambda_adv", blender_lambda_adv);
    set("blender.lambda_l1", blender_lambda_l1);
    set("blender.lambda_perc_vgg", blender_lambda_perc_vgg);
    set("blender.lambda_c", blender_lambda_c);
    set("blender.lambda_reg", blender_lambda_reg);
    validate();
  }
};

}  // namespace hswap::losses
