#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "darkwatch/charts.hpp"
#include "darkwatch/cnn.hpp"
#include "darkwatch/dataset.hpp"
#include "darkwatch/eda.hpp"
#include "darkwatch/linear_models.hpp"
#include "darkwatch/metrics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_atomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw darkwatch::DataError("cannot write " + tmp.string());
        out << content;
    }
    fs::rename(tmp, path);
}

// Replaces each "--config <file>" pair with the file's key = value entries,
// rendered as long options, so the active subcommand validates them like any
// other flag. Keys already present on the command line win over the file.
std::vector<std::string> expand_config_args(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    const auto trim = [](const std::string& s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    for (std::size_t i = 0; i + 1 < args.size(); ++i) {
        if (args[i] != "--config") continue;
        std::ifstream in(args[i + 1]);
        if (!in) throw darkwatch::UsageError("cannot open config file: " + args[i + 1]);
        std::vector<std::string> injected;
        std::string line;
        while (std::getline(in, line)) {
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const std::string stripped = trim(line);
            if (stripped.empty()) continue;
            const auto eq = stripped.find('=');
            if (eq == std::string::npos)
                throw darkwatch::UsageError("config line is not key = value: " + line);
            const std::string key = trim(stripped.substr(0, eq));
            const std::string value = trim(stripped.substr(eq + 1));
            if (key.empty())
                throw darkwatch::UsageError("config line has an empty key: " + line);
            const std::string flag = "--" + key;
            if (std::find(args.begin(), args.end(), flag) != args.end()) continue;
            injected.push_back(flag);
            if (!value.empty()) injected.push_back(value);
        }
        args.erase(args.begin() + long(i), args.begin() + long(i) + 2);
        args.insert(args.begin() + long(i), injected.begin(), injected.end());
        break;
    }
    return args;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw darkwatch::DataError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

darkwatch::ThreatTable load_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw darkwatch::DataError("cannot open " + path);
    return darkwatch::parse_threat_csv(in, path);
}

void print_summary(const json& j) { std::cout << j.dump() << std::endl; }

json metrics_json_obj(const std::string& name, const darkwatch::ConfusionMatrix& cm,
                      const darkwatch::MetricsReport& r) {
    json j = json::parse(darkwatch::metrics_to_json(cm, r));
    j["name"] = name;
    return j;
}

darkwatch::DenoiseStep parse_denoise(const std::string& s) {
    if (s == "none") return darkwatch::DenoiseStep::none;
    if (s == "median") return darkwatch::DenoiseStep::median;
    if (s == "gaussian") return darkwatch::DenoiseStep::gaussian;
    throw darkwatch::UsageError("unknown denoise filter: " + s);
}

struct TabularArgs {
    std::string data;
    std::string out_dir;
    std::string model_kind = "logistic";
    std::string model_file;
    double split_ratio = 0.8;
    std::uint64_t seed = 0;
    bool scale = true;
    darkwatch::TrainConfig config;
};

void add_hyper_flags(CLI::App* cmd, TabularArgs& a) {
    cmd->add_option("--lr", a.config.learning_rate, "learning rate")
        ->capture_default_str();
    cmd->add_option("--epochs", a.config.epochs, "maximum epochs")
        ->capture_default_str();
    cmd->add_option("--l2", a.config.l2_strength, "logistic L2 strength")
        ->capture_default_str();
    cmd->add_option("--lambda", a.config.svm_lambda, "SVM regularization")
        ->capture_default_str();
    cmd->add_option("--tolerance", a.config.tolerance, "early-stop loss delta")
        ->capture_default_str();
}

void run_eda(const std::string& data, long bins, const std::string& out_dir) {
    const auto table = load_table(data);
    fs::create_directories(out_dir);
    const fs::path out(out_dir);

    write_atomic(out / "report.json", darkwatch::eda_report_json(table, bins));

    const auto summaries = darkwatch::summarize_by_threat(table);
    std::vector<std::pair<std::string, double>> totals;
    std::vector<std::string> groups;
    std::vector<double> attempts, impacts;
    for (const auto& g : summaries) {
        totals.emplace_back(g.group_key, double(g.attempt_total));
        groups.push_back(g.group_key);
        attempts.push_back(g.attempt_mean);
        impacts.push_back(g.impact_mean);
    }
    write_atomic(out / "attempts_by_threat.svg",
                 darkwatch::svg_bar_chart("Number of attempts per threat type", totals));
    write_atomic(out / "impact_histogram.svg",
                 darkwatch::svg_histogram("Impact level distribution",
                                          darkwatch::impact_histogram(table, bins)));
    write_atomic(out / "sector_shares.svg",
                 darkwatch::svg_pie_chart("Targeted sector distribution",
                                          darkwatch::sector_shares(table)));
    write_atomic(out / "attempts_box.svg",
                 darkwatch::svg_box_plot("Attempts per threat type",
                                         darkwatch::box_stats_by_threat(table)));
    write_atomic(out / "correlation_heatmap.svg",
                 darkwatch::svg_heatmap("Correlation heatmap",
                                        darkwatch::correlation(table)));
    write_atomic(out / "attempts_impact.svg",
                 darkwatch::svg_grouped_bars("Attempts and impact per threat type",
                                             groups, "mean attempts", attempts,
                                             "mean impact", impacts));

    print_summary({{"command", "eda"},
                   {"rows", table.size()},
                   {"out", out_dir},
                   {"charts", 6}});
}

void run_train(const TabularArgs& a) {
    const auto table = load_table(a.data);
    const auto encoded = darkwatch::encode(table, a.scale);
    const auto pair = darkwatch::split(encoded, a.split_ratio, a.seed);
    const auto kind = darkwatch::model_kind_from_string(a.model_kind);
    const auto model = darkwatch::train(pair.train, kind, a.config);

    const auto pred = darkwatch::predict(model, pair.test.features);
    const auto cm = darkwatch::confusion(pair.test.labels, pred.labels);
    const auto report = darkwatch::scores(cm);

    const fs::path out(a.out_dir);
    write_atomic(out / "model.json", darkwatch::model_to_json(model));
    write_atomic(out / "metrics.json",
                 metrics_json_obj(a.model_kind, cm, report).dump(2));

    print_summary({{"command", "train"},
                   {"model", a.model_kind},
                   {"train_rows", pair.train.rows()},
                   {"test_rows", pair.test.rows()},
                   {"final_loss", model.history.back()},
                   {"epochs_run", model.history.size()},
                   {"accuracy", report.accuracy},
                   {"out", a.out_dir}});
}

void run_evaluate(const TabularArgs& a) {
    const auto table = load_table(a.data);
    const auto model = darkwatch::model_from_json(read_file(a.model_file));

    darkwatch::EncodedDataset encoded;
    encoded.column_names = model.column_names;
    encoded.scaling = model.scaling;
    encoded.features =
        darkwatch::encode_with_layout(table, model.column_names, model.scaling);
    for (const auto& r : table.records) encoded.labels.push_back(r.target);

    const auto pair = darkwatch::split(encoded, a.split_ratio, a.seed);
    const auto pred = darkwatch::predict(model, pair.test.features);
    const auto cm = darkwatch::confusion(pair.test.labels, pred.labels);
    const auto report = darkwatch::scores(cm);

    write_atomic(fs::path(a.out_dir) / "metrics.json",
                 metrics_json_obj(darkwatch::to_string(model.kind), cm, report).dump(2));
    print_summary({{"command", "evaluate"},
                   {"test_rows", pair.test.rows()},
                   {"accuracy", report.accuracy},
                   {"out", a.out_dir}});
}

void run_compare(const std::vector<std::string>& files, const std::string& out_dir) {
    std::vector<std::pair<std::string, darkwatch::MetricsReport>> reports;
    for (const auto& f : files) {
        const std::string text = read_file(f);
        auto [cm, report] = darkwatch::metrics_from_json(text);
        std::string name = json::parse(text).value("name", "");
        if (name.empty()) {
            const fs::path p(f);
            name = p.filename() == "metrics.json" && p.has_parent_path()
                       ? p.parent_path().filename().string()
                       : p.stem().string();
        }
        reports.emplace_back(name, report);
    }
    const auto cmp = darkwatch::compare(reports);
    const fs::path out(out_dir);
    write_atomic(out / "comparison.json", darkwatch::comparison_to_json(cmp));
    write_atomic(out / "accuracy.svg", darkwatch::svg_accuracy_comparison(cmp));
    print_summary({{"command", "compare"},
                   {"winner", cmp.winner},
                   {"models", reports.size()},
                   {"out", out_dir}});
}

struct ImgArgs {
    std::string input;
    std::string output;
    std::string filter = "median";
    int radius = 1;
    double sigma = 1.0;
    bool ascii = false;
    bool csv = false;
    std::string corpus;
    std::string mode = "raw-cnn";
    std::string model_file;
    std::string denoise = "none";
    darkwatch::CnnTrainConfig cnn_config;
};

void run_img_denoise(const ImgArgs& a) {
    const auto img = darkwatch::decode_pnm(read_file(a.input));
    const auto out = a.filter == "gaussian"
                         ? darkwatch::gaussian_blur(img, a.sigma)
                         : darkwatch::median_denoise(img, a.radius);
    write_atomic(a.output, darkwatch::encode_pgm(out, !a.ascii));
    print_summary({{"command", "img denoise"},
                   {"filter", a.filter},
                   {"width", out.width},
                   {"height", out.height},
                   {"out", a.output}});
}

void run_img_hog(const ImgArgs& a) {
    const auto img = darkwatch::decode_pnm(read_file(a.input));
    const auto d = darkwatch::hog(img);
    write_atomic(a.output,
                 a.csv ? darkwatch::hog_to_csv(d) : darkwatch::hog_to_json(d));
    print_summary({{"command", "img hog"},
                   {"descriptor_length", d.values.size()},
                   {"blocks_x", d.blocks_x},
                   {"blocks_y", d.blocks_y},
                   {"out", a.output}});
}

void run_img_train(const ImgArgs& a) {
    const auto corpus = darkwatch::load_labeled_corpus(a.corpus);
    const fs::path out(a.output);

    if (a.mode == "raw-cnn") {
        int classes = 0;
        for (int l : corpus.labels) classes = std::max(classes, l + 1);
        darkwatch::CnnSpec spec;
        spec.in_h = corpus.images[0].height;
        spec.in_w = corpus.images[0].width;
        spec.classes = std::max(classes, 2);
        std::vector<darkwatch::Tensor3> tensors;
        for (const auto& img : corpus.images)
            tensors.push_back(darkwatch::to_tensor(img));
        const auto result = darkwatch::train_cnn(tensors, corpus.labels, spec, a.cnn_config);

        long correct = 0;
        const auto probs = darkwatch::forward(result.net, tensors);
        for (std::size_t i = 0; i < probs.size(); ++i) {
            const auto& p = probs[i];
            const int pred = int(std::max_element(p.begin(), p.end()) - p.begin());
            if (pred == corpus.labels[i]) ++correct;
        }
        write_atomic(out / "cnn.json", darkwatch::cnn_to_json(result.net));
        print_summary({{"command", "img train"},
                       {"mode", a.mode},
                       {"samples", tensors.size()},
                       {"final_loss", result.history.back()},
                       {"train_accuracy", double(correct) / double(tensors.size())},
                       {"out", a.output}});
    } else if (a.mode == "hog-linear") {
        darkwatch::EncodedDataset data;
        for (std::size_t i = 0; i < corpus.images.size(); ++i) {
            const auto d = darkwatch::hog(corpus.images[i]);
            if (data.column_names.empty()) {
                for (std::size_t k = 0; k < d.values.size(); ++k)
                    data.column_names.push_back("hog_" + std::to_string(k));
                data.scaling.assign(d.values.size(), {});
            }
            data.features.push_back(d.values);
            data.labels.push_back(corpus.labels[i]);
        }
        darkwatch::TrainConfig config;
        config.seed = a.cnn_config.seed;
        config.learning_rate = a.cnn_config.learning_rate;
        config.epochs = a.cnn_config.epochs;
        const auto model = darkwatch::train(data, darkwatch::ModelKind::logistic, config);
        const auto pred = darkwatch::predict(model, data.features);
        long correct = 0;
        for (std::size_t i = 0; i < pred.labels.size(); ++i)
            if (pred.labels[i] == data.labels[i]) ++correct;
        write_atomic(out / "model.json", darkwatch::model_to_json(model));
        print_summary({{"command", "img train"},
                       {"mode", a.mode},
                       {"samples", data.rows()},
                       {"final_loss", model.history.back()},
                       {"train_accuracy", double(correct) / double(data.rows())},
                       {"out", a.output}});
    } else {
        throw darkwatch::UsageError("unknown mode: " + a.mode);
    }
}

void run_img_classify(const ImgArgs& a) {
    const auto img = darkwatch::decode_pnm(read_file(a.input));
    const std::string model_text = read_file(a.model_file);
    const std::string version = json::parse(model_text).value("version", "");

    darkwatch::ImagePipeline pipeline;
    pipeline.denoise = parse_denoise(a.denoise);
    pipeline.median_radius = a.radius;
    pipeline.gaussian_sigma = a.sigma;

    darkwatch::Classification c;
    if (version == "darkwatch-cnn/1") {
        pipeline.mode = darkwatch::FeatureMode::raw_cnn;
        c = darkwatch::classify_image(pipeline, darkwatch::cnn_from_json(model_text), img);
    } else if (version == "darkwatch-model/1") {
        pipeline.mode = darkwatch::FeatureMode::hog_linear;
        c = darkwatch::classify_image(pipeline, darkwatch::model_from_json(model_text), img);
    } else {
        throw darkwatch::DataError("unrecognized model file version: " + version);
    }
    print_summary({{"command", "img classify"},
                   {"label", c.label},
                   {"confidence", c.confidence}});
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"darkwatch - threat-table and image classification toolkit"};
    app.require_subcommand(1);

    TabularArgs tab;
    ImgArgs img;
    long eda_bins = 10;
    std::vector<std::string> compare_files;

    auto* validate = app.add_subcommand("validate", "check a threat CSV for null cells");
    validate->add_option("--data", tab.data, "threat CSV path")->required();
    validate->add_option("--out", tab.out_dir, "output directory")
        ->envname("DARKWATCH_OUT");

    auto* eda = app.add_subcommand("eda", "summary statistics and charts");
    eda->add_option("--data", tab.data, "threat CSV path")->required();
    eda->add_option("--bins", eda_bins, "histogram bin count")->capture_default_str();
    eda->add_option("--out", tab.out_dir, "output directory")
        ->envname("DARKWATCH_OUT")
        ->required();

    auto* train = app.add_subcommand("train", "train a logistic or SVM classifier");
    train->add_option("--model", tab.model_kind, "logistic|svm")->capture_default_str();
    train->add_option("--data", tab.data, "threat CSV path")->required();
    train->add_option("--split", tab.split_ratio, "train fraction")->capture_default_str();
    train->add_option("--seed", tab.seed, "split seed")->required();
    train->add_flag("!--no-scale", tab.scale, "disable min-max scaling");
    train->add_option("--out", tab.out_dir, "output directory")
        ->envname("DARKWATCH_OUT")
        ->required();
    add_hyper_flags(train, tab);

    auto* evaluate = app.add_subcommand("evaluate", "evaluate a saved model on a split");
    evaluate->add_option("--model", tab.model_file, "model.json path")->required();
    evaluate->add_option("--data", tab.data, "threat CSV path")->required();
    evaluate->add_option("--split", tab.split_ratio, "train fraction")
        ->capture_default_str();
    evaluate->add_option("--seed", tab.seed, "split seed")->required();
    evaluate->add_option("--out", tab.out_dir, "output directory")
        ->envname("DARKWATCH_OUT")
        ->required();

    auto* compare = app.add_subcommand("compare", "rank metrics reports");
    compare->add_option("files", compare_files, "metrics.json files")
        ->required()
        ->expected(2, -1);
    compare->add_option("--out", tab.out_dir, "output directory")
        ->envname("DARKWATCH_OUT")
        ->required();

    auto* img_cmd = app.add_subcommand("img", "image pipeline commands");
    img_cmd->require_subcommand(1);

    auto* denoise = img_cmd->add_subcommand("denoise", "median or gaussian filter");
    denoise->add_option("--in", img.input, "input PNM")->required();
    denoise->add_option("--out", img.output, "output PGM")->required();
    denoise->add_option("--filter", img.filter, "median|gaussian")->capture_default_str();
    denoise->add_option("--radius", img.radius, "median radius")->capture_default_str();
    denoise->add_option("--sigma", img.sigma, "gaussian sigma")->capture_default_str();
    denoise->add_flag("--ascii", img.ascii, "write P2 instead of P5");

    auto* hog_cmd = img_cmd->add_subcommand("hog", "extract a HOG descriptor");
    hog_cmd->add_option("--in", img.input, "input PNM")->required();
    hog_cmd->add_option("--out", img.output, "output descriptor file")->required();
    hog_cmd->add_flag("--csv", img.csv, "emit flat CSV instead of JSON");

    auto* img_train = img_cmd->add_subcommand("train", "train an image classifier");
    img_train->add_option("--corpus", img.corpus, "directory with labels.csv + PGMs")
        ->required();
    img_train->add_option("--mode", img.mode, "raw-cnn|hog-linear")->capture_default_str();
    img_train->add_option("--lr", img.cnn_config.learning_rate, "learning rate")
        ->capture_default_str();
    img_train->add_option("--epochs", img.cnn_config.epochs, "epochs")
        ->capture_default_str();
    img_train->add_option("--batch", img.cnn_config.batch_size, "mini-batch size")
        ->capture_default_str();
    img_train->add_option("--seed", img.cnn_config.seed, "init/shuffle seed")->required();
    img_train->add_option("--out", img.output, "output directory")
        ->envname("DARKWATCH_OUT")
        ->required();

    auto* classify = img_cmd->add_subcommand("classify", "classify one image");
    classify->add_option("--model", img.model_file, "cnn.json or model.json")->required();
    classify->add_option("--in", img.input, "input PNM")->required();
    classify->add_option("--denoise", img.denoise, "none|median|gaussian")
        ->capture_default_str();
    classify->add_option("--radius", img.radius, "median radius")->capture_default_str();
    classify->add_option("--sigma", img.sigma, "gaussian sigma")->capture_default_str();

    for (CLI::App* sub : {validate, eda, train, evaluate, compare, denoise, hog_cmd,
                          img_train, classify})
        sub->add_option("--config", "key = value config file (# comments)");

    try {
        // CLI11's vector parse consumes from the back
        auto args = expand_config_args(argc, argv);
        std::reverse(args.begin(), args.end());
        app.parse(std::move(args));

        if (*validate) {
            const auto table = load_table(tab.data);
            const auto report = darkwatch::validate_no_nulls(table);
            json counts;
            for (std::size_t c = 0; c < darkwatch::kThreatColumns.size(); ++c)
                counts[darkwatch::kThreatColumns[c]] = report.counts[c];
            const json summary = {{"command", "validate"},
                                  {"rows", table.size()},
                                  {"null_counts", counts},
                                  {"clean", report.clean()}};
            if (!tab.out_dir.empty())
                write_atomic(fs::path(tab.out_dir) / "null_report.json", summary.dump(2));
            print_summary(summary);
        } else if (*eda) {
            run_eda(tab.data, eda_bins, tab.out_dir);
        } else if (*train) {
            run_train(tab);
        } else if (*evaluate) {
            run_evaluate(tab);
        } else if (*compare) {
            run_compare(compare_files, tab.out_dir);
        } else if (*denoise) {
            run_img_denoise(img);
        } else if (*hog_cmd) {
            run_img_hog(img);
        } else if (*img_train) {
            run_img_train(img);
        } else if (*classify) {
            run_img_classify(img);
        }
        return 0;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const darkwatch::UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const darkwatch::NumericError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
