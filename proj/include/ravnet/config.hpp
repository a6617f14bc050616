#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "ravnet/arch.hpp"
#include "ravnet/errors.hpp"
#include "ravnet/windowing.hpp"

namespace ravnet {

enum class LossKind { dice, bce };

struct TrainConfig {
  double lr = 1e-4;
  int batch_size = 1;
  int max_epochs = 500;
  double early_stop_loss = 5e-4;
  LossKind loss = LossKind::dice;
  std::uint64_t seed = 1;
  WindowSpec window;
  NetworkConfig net;

  void validate() const {
    if (!(lr > 0.0)) throw ConfigError("lr must be positive");
    if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
    if (max_epochs < 1) throw ConfigError("max_epochs must be at least 1");
    if (!(early_stop_loss > 0.0)) {
      throw ConfigError("early_stop_loss must be positive");
    }
    window.validate();
  }
};

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  double r = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0') {
    throw ConfigError("bad numeric value '" + v + "' for key '" + key + "'");
  }
  return r;
}

inline long long parse_int(const std::string& key, const std::string& v) {
  char* end = nullptr;
  long long r = std::strtoll(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0') {
    throw ConfigError("bad integer value '" + v + "' for key '" + key + "'");
  }
  return r;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  throw ConfigError("bad boolean value '" + v + "' for key '" + key + "'");
}

}  // namespace detail

/// Canonical flat key=value form; parse(serialize(cfg)) reproduces cfg
/// exactly (doubles printed with %.17g).
inline std::string serialize_train_config(const TrainConfig& cfg) {
  std::string out;
  auto line = [&](const std::string& k, const std::string& v) {
    out += k + "=" + v + "\n";
  };
  line("lr", detail::format_double(cfg.lr));
  line("batch_size", std::to_string(cfg.batch_size));
  line("max_epochs", std::to_string(cfg.max_epochs));
  line("early_stop_loss", detail::format_double(cfg.early_stop_loss));
  line("loss", cfg.loss == LossKind::dice ? "dice" : "bce");
  line("seed", std::to_string(cfg.seed));
  line("window.wl", detail::format_double(cfg.window.wl));
  line("window.ww", detail::format_double(cfg.window.ww));
  line("net.levels", std::to_string(cfg.net.levels));
  line("net.base_channels", std::to_string(cfg.net.base_channels));
  line("net.in_channels", std::to_string(cfg.net.in_channels));
  line("net.out_channels", std::to_string(cfg.net.out_channels));
  line("net.encoder",
       cfg.net.encoder == EncoderKind::cofres ? "cofres" : "plain");
  line("net.decoder", cfg.net.decoder == DecoderKind::ar ? "ar" : "plain");
  line("net.use_ca", cfg.net.use_ca ? "1" : "0");
  line("net.ca_all_skips", cfg.net.ca_all_skips ? "1" : "0");
  return out;
}

inline void apply_config_line(TrainConfig& cfg, const std::string& key,
                              const std::string& value) {
  using detail::parse_bool;
  using detail::parse_double;
  using detail::parse_int;
  if (key == "lr") {
    cfg.lr = parse_double(key, value);
  } else if (key == "batch_size") {
    cfg.batch_size = int(parse_int(key, value));
  } else if (key == "max_epochs") {
    cfg.max_epochs = int(parse_int(key, value));
  } else if (key == "early_stop_loss") {
    cfg.early_stop_loss = parse_double(key, value);
  } else if (key == "loss") {
    if (value == "dice") {
      cfg.loss = LossKind::dice;
    } else if (value == "bce") {
      cfg.loss = LossKind::bce;
    } else {
      throw ConfigError("loss must be 'dice' or 'bce', got '" + value + "'");
    }
  } else if (key == "seed") {
    cfg.seed = std::uint64_t(parse_int(key, value));
  } else if (key == "window.wl") {
    cfg.window.wl = parse_double(key, value);
  } else if (key == "window.ww") {
    cfg.window.ww = parse_double(key, value);
  } else if (key == "net.levels") {
    cfg.net.levels = int(parse_int(key, value));
  } else if (key == "net.base_channels") {
    cfg.net.base_channels = int(parse_int(key, value));
  } else if (key == "net.in_channels") {
    cfg.net.in_channels = int(parse_int(key, value));
  } else if (key == "net.out_channels") {
    cfg.net.out_channels = int(parse_int(key, value));
  } else if (key == "net.encoder") {
    if (value == "cofres") {
      cfg.net.encoder = EncoderKind::cofres;
    } else if (value == "plain") {
      cfg.net.encoder = EncoderKind::plain;
    } else {
      throw ConfigError("net.encoder must be 'cofres' or 'plain', got '" +
                        value + "'");
    }
  } else if (key == "net.decoder") {
    if (value == "ar") {
      cfg.net.decoder = DecoderKind::ar;
    } else if (value == "plain") {
      cfg.net.decoder = DecoderKind::plain;
    } else {
      throw ConfigError("net.decoder must be 'ar' or 'plain', got '" + value +
                        "'");
    }
  } else if (key == "net.use_ca") {
    cfg.net.use_ca = parse_bool(key, value);
  } else if (key == "net.ca_all_skips") {
    cfg.net.ca_all_skips = parse_bool(key, value);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

/// Parses key=value lines into a TrainConfig, starting from defaults.
/// Blank lines and '#' comments are skipped.
inline TrainConfig parse_train_config(const std::string& text) {
  TrainConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    if (line[start] == '#') continue;
    const auto eq = line.find('=', start);
    if (eq == std::string::npos) {
      throw ConfigError("expected key=value on config line " +
                        std::to_string(line_no));
    }
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t");
      const auto b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    apply_config_line(cfg, trim(line.substr(start, eq - start)),
                      trim(line.substr(eq + 1)));
  }
  return cfg;
}

inline TrainConfig load_train_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_train_config(buf.str());
}

}  // namespace ravnet
