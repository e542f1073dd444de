#include "support.hpp"

#include "volnet/cli.hpp"
#include "volnet/config.hpp"
#include "volnet/features.hpp"

#include <doctest.h>

#include <sstream>

using namespace volnet;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args)
{
    args.insert(args.begin(), "volnet");
    std::ostringstream out, err;
    Run r;
    r.code = cli_main(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

const fs::path& fixture_dir()
{
    static const fs::path dir = [] {
        const auto d = support::scratch("prices");
        const auto r = run({"fixture", "--out", d.string(), "--start", "2012-10-01"});
        REQUIRE(r.code == 0);
        return d;
    }();
    return dir;
}

}  // namespace

TEST_CASE("usage errors exit with 1 and print usage")
{
    for (const auto& args : std::vector<std::vector<std::string>>{
             {}, {"bogus"}, {"ingest", "--out", "x"}, {"experiment", "--config"}, {"fixture", "--out", "x", "--seed", "abc"}}) {
        const auto r = run(args);
        CAPTURE(r.err);
        CHECK(r.code == 1);
        CHECK(r.err.find("Usage") != std::string::npos);
        CHECK(r.err.find("category=usage") != std::string::npos);
    }
    const auto help = run({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("experiment") != std::string::npos);
}

TEST_CASE("ingest exports the dataset and names a missing instrument")
{
    const auto out = support::scratch("ingest");
    const auto r = run({"ingest", "--data", fixture_dir().string(), "--out", out.string()});
    REQUIRE(r.code == 0);
    const auto ds = features::read_dataset_csv(out / "dataset.csv");
    CHECK(ds.rows() > 500);
    CHECK(fs::exists(out / "alignment.csv"));
    CHECK(fs::exists(out / "aligned" / "NIKKEI.csv"));
    CHECK(support::slurp(out / "dataset.csv").rfind("date,INDIAVIX,CBOEVIX,CRUDESDR,DJIASDR,DAXSDR,HANGSDR,NIKKEISDR,NIFTYSDR,GOLDSDR\n", 0) == 0);

    const auto partial = support::scratch("partial");
    for (const auto& entry : fs::directory_iterator(fixture_dir())) {
        if (entry.path().filename() != "NIKKEI.csv") fs::copy_file(entry.path(), partial / entry.path().filename());
    }
    const auto missing = run({"ingest", "--data", partial.string(), "--out", (out / "m").string()});
    CHECK(missing.code == 2);
    CHECK(missing.err.find("kind=MissingInstrument") != std::string::npos);
    CHECK(missing.err.find("NIKKEI") != std::string::npos);

    support::write_text(partial / "NIKKEI.csv", "date,close\n2013-01-02,1.5\n2013-01-03,oops\n");
    const auto malformed = run({"ingest", "--data", partial.string(), "--out", (out / "m").string()});
    CHECK(malformed.code == 2);
    CHECK(malformed.err.find("kind=MalformedRow") != std::string::npos);
    CHECK(malformed.err.find("NIKKEI.csv:3") != std::string::npos);
}

TEST_CASE("dataset inspection")
{
    const auto out = support::scratch("inspect");
    REQUIRE(run({"ingest", "--data", fixture_dir().string(), "--out", out.string()}).code == 0);
    const auto r = run({"dataset", "--input", (out / "dataset.csv").string(), "--start", "2014-01-01", "--end",
                        "2014-12-31", "--out", (out / "2014.csv").string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("NIFTYSDR") != std::string::npos);
    const auto slice = features::read_dataset_csv(out / "2014.csv");
    CHECK(slice.dates.front() >= Date::from_ymd(2014, 1, 1));
    CHECK(slice.dates.back() <= Date::from_ymd(2014, 12, 31));
    CHECK(run({"dataset", "--input", (out / "nope.csv").string()}).code == 2);
}

TEST_CASE("train and plot subcommands")
{
    const auto dir = support::scratch("train");
    support::write_text(dir / "t.cfg", "preset=1\ndata_dir=" + fixture_dir().string() +
                                           "\nalgorithms=RPROP\nhidden_sizes=3\nmax_epochs=8\n");
    const auto r = run({"train", "--config", (dir / "t.cfg").string(), "--out", (dir / "out").string(), "--arch", "CFFN"});
    CAPTURE(r.err);
    REQUIRE(r.code == 0);
    for (const char* name : {"network.txt", "curve.csv", "metrics.csv", "test_regression.svg", "test_regression.csv"}) {
        CAPTURE(name);
        CHECK(fs::exists(dir / "out" / name));
    }
    const auto metrics = support::slurp(dir / "out" / "metrics.csv");
    CHECK(metrics.rfind("split,mse,r,mape\ntrain,", 0) == 0);
    CHECK(support::count_lines(metrics) == 3);

    const auto bad_alg = run({"train", "--config", (dir / "t.cfg").string(), "--out", (dir / "o2").string(), "--alg", "ADAM"});
    CHECK(bad_alg.code == 1);

    const auto reg = run({"plot", "regression", "--input", (dir / "out" / "test_regression.csv").string(), "--out",
                          (dir / "again.svg").string(), "--title", "again"});
    CHECK(reg.code == 0);
    CHECK(fs::exists(dir / "again.svg"));
    CHECK(fs::exists(dir / "again.csv"));

    const auto ingest_dir = support::scratch("overlay");
    REQUIRE(run({"ingest", "--data", fixture_dir().string(), "--out", ingest_dir.string()}).code == 0);
    const auto ds = (ingest_dir / "dataset.csv").string();
    const auto ov = run({"plot", "overlay", "--a", ds + ":NIFTYSDR", "--b", ds + ":GOLDSDR", "--out",
                         (dir / "overlay.svg").string()});
    CAPTURE(ov.err);
    CHECK(ov.code == 0);
    CHECK(support::slurp(dir / "overlay.svg").find("<polyline") != std::string::npos);
    CHECK(run({"plot", "overlay", "--a", ds + ":NOPE", "--b", ds, "--out", (dir / "x.svg").string()}).code == 2);
}

TEST_CASE("config errors exit with 1")
{
    const auto dir = support::scratch("badcfg");
    support::write_text(dir / "bad.cfg", "preset=1\nlearning_rate=0.1\n");
    const auto r = run({"experiment", "--config", (dir / "bad.cfg").string(), "--out", (dir / "out").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("kind=ConfigError") != std::string::npos);
    CHECK(r.err.find("learning_rate") != std::string::npos);
}

TEST_CASE("bundled configs parse")
{
    for (int n = 1; n <= 3; ++n) {
        const auto path = support::source_dir() / "configs" / ("exp" + std::to_string(n) + ".cfg");
        const auto cfg = config::load_experiment_config(path);
        CHECK(cfg.spec.grid_size() == 54);
        REQUIRE(cfg.data_dir);
    }
}

TEST_CASE("experiment subcommand runs the default grid")
{
    const auto dir = support::scratch("experiment");
    support::write_text(dir / "exp1.cfg", "preset=1\ndata_dir=" + fixture_dir().string() + "\n");
    const auto r = run({"experiment", "--config", (dir / "exp1.cfg").string(), "--out", (dir / "out").string(), "--quiet",
                        "--workers", "2"});
    CAPTURE(r.err);
    REQUIRE(r.code == 0);
    CHECK(support::count_lines(support::slurp(dir / "out" / "trials.csv")) == 55);
    CHECK(support::slurp(dir / "out" / "tables.md").find("Trials: 54") != std::string::npos);
    CHECK(r.err.empty());

    support::write_text(dir / "late.cfg", "preset=1\ntest_start=2020-01-01\ntest_end=2020-02-01\ndata_dir=" +
                                              fixture_dir().string() + "\n");
    const auto late = run({"experiment", "--config", (dir / "late.cfg").string(), "--out", (dir / "late").string()});
    CHECK(late.code == 2);
    CHECK(late.err.find("kind=EmptyTest") != std::string::npos);
    CHECK(fs::exists(dir / "late" / "error.txt"));
}
