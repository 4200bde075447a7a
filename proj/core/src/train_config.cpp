#include "atelier/train_config.hpp"

namespace atelier::training {

ModelConfig ModelConfig::toy() {
  ModelConfig m;
  m.embed_dim = 32;
  m.hidden = 16;
  m.noise_dim = 32;
  m.gen_channels = 8;
  m.disc_channels = 8;
  m.region_channels = 8;
  m.out_res = 64;
  return m;
}

bool ModelConfig::architecture_equals(const ModelConfig& o) const {
  return embed_dim == o.embed_dim && hidden == o.hidden && noise_dim == o.noise_dim &&
         gen_channels == o.gen_channels && disc_channels == o.disc_channels &&
         region_channels == o.region_channels && out_res == o.out_res;
}

nlohmann::json ModelConfig::to_json() const {
  return {{"embed_dim", embed_dim},       {"hidden", hidden},
          {"noise_dim", noise_dim},       {"gen_channels", gen_channels},
          {"disc_channels", disc_channels}, {"region_channels", region_channels},
          {"out_res", out_res},           {"vocab_size", vocab_size}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j, ModelConfig m) {
  m.embed_dim = j.value("embed_dim", m.embed_dim);
  m.hidden = j.value("hidden", m.hidden);
  m.noise_dim = j.value("noise_dim", m.noise_dim);
  m.gen_channels = j.value("gen_channels", m.gen_channels);
  m.disc_channels = j.value("disc_channels", m.disc_channels);
  m.region_channels = j.value("region_channels", m.region_channels);
  m.out_res = j.value("out_res", m.out_res);
  m.vocab_size = j.value("vocab_size", m.vocab_size);
  return m;
}

TrainConfig TrainConfig::toy() {
  TrainConfig c;
  c.model = ModelConfig::toy();
  c.batch_size = 16;
  return c;
}

nlohmann::json TrainConfig::to_json() const {
  return {{"model", model.to_json()},
          {"lr_g", lr_g},
          {"lr_d", lr_d},
          {"beta1", beta1},
          {"beta2", beta2},
          {"batch_size", batch_size},
          {"checkpoint_every", checkpoint_every},
          {"lambda_damsm", lambda_damsm},
          {"seed", seed},
          {"min_word_freq", min_word_freq},
          {"run_name", run_name},
          {"runs_dir", runs_dir.string()}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j, TrainConfig c) {
  if (j.value("preset", std::string()) == "toy") c = toy();
  if (j.contains("model")) c.model = ModelConfig::from_json(j.at("model"), c.model);
  c.lr_g = j.value("lr_g", c.lr_g);
  c.lr_d = j.value("lr_d", c.lr_d);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
  c.lambda_damsm = j.value("lambda_damsm", c.lambda_damsm);
  c.seed = j.value("seed", c.seed);
  c.min_word_freq = j.value("min_word_freq", c.min_word_freq);
  c.run_name = j.value("run_name", c.run_name);
  c.runs_dir = j.value("runs_dir", c.runs_dir.string());
  return c;
}

}  // namespace atelier::training
