#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "helpers.hpp"
#include "scpdiag/io.hpp"

// End-to-end checks of the installed binary. Commands run through std::system
// with stdout/stderr redirected into the scratch directory.

namespace fs = std::filesystem;
using scpdiag::json;

namespace {

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("scpdiag_cli_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
};

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(SCPDIAG_CLI_PATH) + " " + args + " >" + log.string() +
                          ".out 2>" + log.string() + ".err";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

// Predictable two-channel dataset: grid-aligned tones plus weak noise.
void write_tonal_dataset(const fs::path& path, std::size_t rows) {
  std::ofstream out(path);
  out << "date,alpha,beta\n";
  std::mt19937_64 eng(99);
  std::normal_distribution<double> noise(0.0, 0.05);
  for (std::size_t t = 0; t < rows; ++t) {
    const double u = static_cast<double>(t);
    const double a = 1.5 * std::sin(2.0 * std::numbers::pi * 3.0 * u / 24.0) +
                     0.7 * std::cos(2.0 * std::numbers::pi * 5.0 * u / 24.0) + noise(eng);
    const double b = 1.1 * std::sin(2.0 * std::numbers::pi * 2.0 * u / 24.0) + noise(eng);
    out << t << ',' << scpdiag::detail::fmt17(a) << ',' << scpdiag::detail::fmt17(b) << '\n';
  }
}

}  // namespace

TEST_CASE("cli: missing file fails with a named path and exit code 2") {
  Scratch s;
  const int rc = run_cli("scp --data " + (s.dir / "absent.csv").string() + " --horizon 48 --out " +
                             (s.dir / "out").string(),
                         s.dir / "missing");
  CHECK(rc == 2);
  std::ifstream err(s.dir / "missing.err");
  std::stringstream buf;
  buf << err.rdbuf();
  CHECK(buf.str().find("absent.csv") != std::string::npos);
}

TEST_CASE("cli: bad usage exits with code 1") {
  Scratch s;
  CHECK(run_cli("scp --horizon 48", s.dir / "usage") == 1);          // missing --data
  CHECK(run_cli("frobnicate", s.dir / "unknown") == 1);              // unknown subcommand
  CHECK(run_cli("scp --data x --format yaml", s.dir / "fmt") == 1);  // bad enum
}

TEST_CASE("cli: scp end-to-end on a predictable dataset") {
  Scratch s;
  const auto data = s.dir / "tonal.csv";
  write_tonal_dataset(data, 1200);
  const auto out = s.dir / "out";
  const int rc = run_cli("scp --data " + data.string() +
                             " --horizon 96 --stride 8 --split test --out " + out.string(),
                         s.dir / "scp");
  REQUIRE(rc == 0);

  std::ifstream in(out / "scp_summary.json");
  REQUIRE(in.good());
  const json summary = json::parse(in);
  CHECK(summary.at("type") == "scp_summary");
  CHECK(summary.at("instances_failed").get<std::size_t>() == 0);
  CHECK(summary.at("dataset_mean_p").get<double>() >= 0.8);  // tones carry across windows
  CHECK(summary.at("run_config").at("welch").at("segment_length").get<int>() == 24);
  CHECK(summary.at("per_channel").size() == 2);

  // instance stream exists and has the config echo up front
  std::ifstream csv(out / "scp_instances.csv");
  std::string line;
  std::getline(csv, line);
  CHECK(line.rfind("# config:", 0) == 0);
  std::getline(csv, line);
  CHECK(line == "channel,index,var_y,delta_sq,mse_lb,p_raw,p,error");
}

TEST_CASE("cli: determinism across reruns and thread counts") {
  Scratch s;
  const auto data = s.dir / "tonal.csv";
  write_tonal_dataset(data, 800);
  const auto out1 = s.dir / "r1";
  const auto out2 = s.dir / "r2";
  const auto out4 = s.dir / "r4";
  REQUIRE(run_cli("scp --data " + data.string() + " --horizon 64 --stride 4 --out " +
                      out1.string() + " --threads 1",
                  s.dir / "d1") == 0);
  REQUIRE(run_cli("scp --data " + data.string() + " --horizon 64 --stride 4 --out " +
                      out2.string() + " --threads 1",
                  s.dir / "d2") == 0);
  REQUIRE(run_cli("scp --data " + data.string() + " --horizon 64 --stride 4 --out " +
                      out4.string() + " --threads 4",
                  s.dir / "d4") == 0);

  const auto slurp = [](const fs::path& p) {
    std::ifstream in(p);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };
  // identical flags and seed: byte-identical outputs
  CHECK(slurp(out1 / "scp_instances.csv") == slurp(out2 / "scp_instances.csv"));
  CHECK(slurp(out1 / "scp_summary.json") == slurp(out2 / "scp_summary.json"));

  // different thread count: identical data, only the echoed config differs
  const auto data_rows = [&](const fs::path& p) {
    std::ifstream in(p);
    std::string line, all;
    while (std::getline(in, line))
      if (line.rfind("# config:", 0) != 0) all += line + '\n';
    return all;
  };
  CHECK(data_rows(out1 / "scp_instances.csv") == data_rows(out4 / "scp_instances.csv"));
  {
    std::ifstream a(out1 / "scp_summary.json"), b(out4 / "scp_summary.json");
    json ja = json::parse(a), jb = json::parse(b);
    ja.erase("run_config");
    jb.erase("run_config");
    CHECK(ja == jb);
  }
}

TEST_CASE("cli: band restriction is echoed in the report") {
  Scratch s;
  const auto data = s.dir / "tonal.csv";
  write_tonal_dataset(data, 1200);
  const auto out = s.dir / "out";
  REQUIRE(run_cli("scp --data " + data.string() +
                      " --horizon 96 --stride 8 --bands 4 --band 0 --out " + out.string(),
                  s.dir / "band") == 0);
  std::ifstream in(out / "scp_summary.json");
  const json summary = json::parse(in);
  CHECK(summary.at("restricted_to_band") == "band0");
  CHECK(summary.at("run_config").at("band").get<int>() == 0);
}

TEST_CASE("cli: lur with ground-truth and constant predictions") {
  Scratch s;
  const auto data = s.dir / "tonal.csv";
  write_tonal_dataset(data, 1200);
  const auto table = scpdiag::load_csv(data);
  scpdiag::SplitFractions fr{0.7, 0.1, 0.2};
  const std::size_t horizon = 96;

  const auto dump_path = s.dir / "preds.csv";
  {
    std::ofstream out(dump_path);
    out << "model_id,channel,index,step,value\n";
    for (std::size_t c = 0; c < table.channel_count(); ++c) {
      const auto pairs =
          scpdiag::windowize(table, c, horizon, horizon, 16, fr, scpdiag::Split::test);
      for (const auto& p : pairs) {
        for (std::size_t st = 0; st < horizon; ++st) {
          out << "oracle," << p.channel_id << ',' << p.index << ',' << st << ','
              << scpdiag::detail::fmt17(p.future[st]) << '\n';
          out << "flatliner," << p.channel_id << ',' << p.index << ',' << st << ",0\n";
        }
      }
    }
  }

  const auto out = s.dir / "out";
  REQUIRE(run_cli("lur --data " + data.string() + " --predictions " + dump_path.string() +
                      " --horizon 96 --stride 16 --out " + out.string(),
                  s.dir / "lur") == 0);
  std::ifstream in(out / "lur_summary.json");
  const json summary = json::parse(in);
  REQUIRE(summary.at("models").size() == 2);
  for (const auto& m : summary.at("models")) {
    if (m.at("model") == "oracle") {
      CHECK(m.at("lur").get<double>() >= 1.0);
    } else {
      CHECK(m.at("model") == "flatliner");
      CHECK(m.at("lur").get<double>() == 0.0);
    }
  }
}

TEST_CASE("cli: misaligned predictions fail with the offending instance named") {
  Scratch s;
  const auto data = s.dir / "tonal.csv";
  write_tonal_dataset(data, 600);
  const auto dump_path = s.dir / "preds.csv";
  {
    std::ofstream out(dump_path);
    out << "model_id,channel,index,step,value\n";
    for (std::size_t st = 0; st < 48; ++st)
      out << "m,alpha,99999," << st << ",0\n";
  }
  const int rc = run_cli("lur --data " + data.string() + " --predictions " + dump_path.string() +
                             " --horizon 48 --out " + (s.dir / "out").string(),
                         s.dir / "mis");
  CHECK(rc == 2);
  std::ifstream err(s.dir / "mis.err");
  std::stringstream buf;
  buf << err.rdbuf();
  CHECK(buf.str().find("99999") != std::string::npos);
  CHECK(buf.str().find("alpha") != std::string::npos);
}

TEST_CASE("cli: toy sweep produces a six-row monotone table") {
  Scratch s;
  const auto out = s.dir / "out";
  REQUIRE(run_cli("toy --format csv --out " + out.string(), s.dir / "toy") == 0);
  std::ifstream in(out / "toy_study.csv");
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);  // config comment
  CHECK(line.rfind("# config:", 0) == 0);
  std::getline(in, line);
  CHECK(line == "noise_level,mean_model_mse,mean_mse_lb,mean_p");
  std::vector<double> ps;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = scpdiag::detail::split_csv_line(line);
    REQUIRE(fields.size() == 4);
    ps.push_back(std::stod(fields[3]));
  }
  REQUIRE(ps.size() == 6);
  for (std::size_t i = 1; i < ps.size(); ++i) CHECK(ps[i] <= ps[i - 1] + 0.01);
}

TEST_CASE("cli: config file fills flags and explicit flags win") {
  Scratch s;
  const auto data = s.dir / "tonal.csv";
  write_tonal_dataset(data, 800);
  const auto cfg_path = s.dir / "cfg.json";
  {
    std::ofstream out(cfg_path);
    out << R"({"horizon": 64, "stride": 4, "bands": 4})";
  }
  const auto out = s.dir / "out";
  REQUIRE(run_cli("scp --data " + data.string() + " --config " + cfg_path.string() +
                      " --stride 8 --out " + out.string(),
                  s.dir / "cfg") == 0);
  std::ifstream in(out / "scp_summary.json");
  const json summary = json::parse(in);
  CHECK(summary.at("run_config").at("horizon").get<int>() == 64);   // from config
  CHECK(summary.at("run_config").at("stride").get<int>() == 8);     // explicit wins
  CHECK(summary.at("run_config").at("partition").at("bands").size() == 4);
}

TEST_CASE("cli: stratify and correlate run from a records file") {
  Scratch s;
  const auto records = s.dir / "records.csv";
  {
    std::ofstream out(records);
    out << "channel,index,p,mse_lb,var_y,model_id,mse\n";
    std::mt19937_64 eng(5);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int c = 0; c < 4; ++c) {
      for (int i = 0; i < 60; ++i) {
        const double p = unif(eng);
        const double lb = 0.1 + 0.2 * c + 0.05 * p;
        out << "ch" << c << ',' << i << ',' << p << ',' << lb << ",1.0,m," << (1.3 * lb + 0.02)
            << '\n';
      }
    }
  }
  const auto out = s.dir / "out";
  REQUIRE(run_cli("stratify --records " + records.string() + " --bins 10 --format csv --out " +
                      out.string(),
                  s.dir / "strat") == 0);
  std::ifstream strat(out / "stratified.csv");
  std::string line;
  std::getline(strat, line);
  CHECK(line.rfind("# config:", 0) == 0);
  std::getline(strat, line);
  CHECK(line == "bin,lo,hi,model_id,count,mean_mse,below_min_count");
  std::size_t rows = 0;
  while (std::getline(strat, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 10);

  REQUIRE(run_cli("correlate --records " + records.string() + " --out " + out.string(),
                  s.dir / "corr") == 0);
  std::ifstream corr(out / "correlation.json");
  const json report = json::parse(corr);
  CHECK(report.at("pearson").at("m").get<double>() >= 0.95);
}

TEST_CASE("cli: drift profile over a spliced channel") {
  Scratch s;
  const auto data = s.dir / "spliced.csv";
  {
    std::ofstream out(data);
    out << "date,ch\n";
    std::mt19937_64 eng(13);
    std::normal_distribution<double> noise(0.0, 1.0);
    const std::size_t half = 2048;
    for (std::size_t t = 0; t < 2 * half; ++t) {
      double v;
      if (t < half) {
        const double u = static_cast<double>(t);
        v = 1.5 * std::sin(2.0 * std::numbers::pi * 3.0 * u / 64.0) +
            0.8 * std::cos(2.0 * std::numbers::pi * 7.0 * u / 64.0) + 0.05 * noise(eng);
      } else {
        v = noise(eng);
      }
      out << t << ',' << scpdiag::detail::fmt17(v) << '\n';
    }
  }
  const auto out = s.dir / "out";
  REQUIRE(run_cli("drift --data " + data.string() +
                      " --horizon 256 --stride 256 --split train --train-frac 1.0 "
                      "--val-frac 0 --test-frac 0 --segment-length 64 --overlap 32 "
                      "--format csv --out " +
                      out.string(),
                  s.dir / "drift") == 0);
  std::ifstream in(out / "drift_profile.csv");
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);  // config
  std::getline(in, line);  // header
  CHECK(line.rfind("index,share_band0", 0) == 0);
  // eta column: last share column + 1; parse rows and confirm the drop
  std::vector<double> etas;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = scpdiag::detail::split_csv_line(line);
    etas.push_back(std::stod(fields[9]));  // index + 8 shares + eta
  }
  REQUIRE(etas.size() >= 12);
  CHECK(etas.front() > 0.8);
  CHECK(etas.back() < 0.4);
}

TEST_CASE("cli: bands subcommand reports per-channel shares") {
  Scratch s;
  const auto data = s.dir / "tonal.csv";
  write_tonal_dataset(data, 600);
  const auto out = s.dir / "out";
  REQUIRE(run_cli("bands --data " + data.string() +
                      " --split train --segment-length 48 --thirds --format csv --out " +
                      out.string(),
                  s.dir / "bands") == 0);
  std::ifstream in(out / "band_shares.csv");
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  CHECK(line == "channel,band,lo,hi,share");
  std::map<std::string, double> totals;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = scpdiag::detail::split_csv_line(line);
    totals[f[0]] += std::stod(f[4]);
  }
  REQUIRE(totals.size() == 2);
  for (const auto& [channel, total] : totals) CHECK(total == Catch::Approx(1.0).epsilon(1e-9));
}
