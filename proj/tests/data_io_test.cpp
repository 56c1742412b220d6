#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "sublinear/gxl.hpp"
#include "sublinear/jsonl.hpp"
#include "sublinear/synthetic.hpp"
#include "support/test_support.hpp"

using namespace sublinear;
namespace fs = std::filesystem;

namespace {

/// Fresh scratch directory per test.
fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("sublinear_data_io_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary);
    out << s;
}

GxlAttrConfig letter_config() {
    GxlAttrConfig c;
    c.node_attr_names = {"x", "y"};
    return c;
}

const char* kMinimalGxl = R"(<?xml version="1.0" encoding="UTF-8"?>
<!DOCTYPE gxl SYSTEM "http://www.gupro.de/GXL/gxl-1.0.dtd">
<gxl>
  <graph id="g" edgeids="false" edgemode="undirected">
    <node id="_0"><attr name="x"><float>0.5</float></attr><attr name="y"><float>1.25</float></attr></node>
    <node id="_1"><attr name="x"><float>-2</float></attr><attr name="y"><float>3</float></attr></node>
    <edge from="_0" to="_1"/>
  </graph>
</gxl>)";

std::string gxl_with(const std::string& body) {
    return "<gxl><graph id=\"g\" edgemode=\"undirected\">" + body + "</graph></gxl>";
}

std::string node(const std::string& id, double x, double y) {
    return "<node id=\"" + id + "\"><attr name=\"x\"><float>" + std::to_string(x) +
           "</float></attr><attr name=\"y\"><float>" + std::to_string(y) + "</float></attr></node>";
}

}  // namespace

// ---- JSONL -----------------------------------------------------------------

TEST(Jsonl, EmptySplitFile) {
    const auto dir = scratch("empty");
    write_text(dir / "train.jsonl", "");
    EXPECT_TRUE(read_split_jsonl(dir / "train.jsonl").empty());
}

TEST(Jsonl, RunningExampleLine) {
    const auto dir = scratch("running");
    write_text(dir / "train.jsonl", R"({"id": "x", "class": "c", "nodes": [[1], [2]], "edges": [[0, 1, [1]]]})"
                                    "\n");
    const auto recs = read_split_jsonl(dir / "train.jsonl");
    ASSERT_EQ(recs.size(), 1u);
    EXPECT_EQ(recs[0].id, "x");
    EXPECT_EQ(recs[0].cls, "c");
    EXPECT_EQ(recs[0].graph, testgen::running_x());
}

TEST(Jsonl, ReversedEdgeIndicesAreTheSameEdge) {
    const auto g = graph_from_json(nlohmann::json::parse(R"({"nodes": [[1], [2]], "edges": [[1, 0, [1]]]})"));
    EXPECT_EQ(g, testgen::running_x());
}

TEST(Jsonl, RoundTripIsFloatExact) {
    SyntheticSpec spec;
    spec.n_train = 20;
    spec.n_validation = 10;
    spec.n_test = 10;
    spec.seed = 3;
    auto ds = generate_synthetic(spec).dataset;
    // Awkward doubles survive the text round trip.
    ds.splits[kTrain][0].graph = scale(ds.splits[kTrain][0].graph, 1.0 / 3.0);
    const auto dir = scratch("roundtrip");
    write_dataset(ds, dir);
    const auto back = read_dataset(dir);
    EXPECT_EQ(back.name, ds.name);
    EXPECT_EQ(back.attr_dim, ds.attr_dim);
    EXPECT_EQ(back.class_set, ds.class_set);
    EXPECT_EQ(back.splits, ds.splits);
    EXPECT_EQ(back.provenance, ds.provenance);
}

TEST(Jsonl, MalformedLineReportsLineNumber) {
    const auto dir = scratch("malformed");
    write_text(dir / "train.jsonl",
               "{\"id\": \"a\", \"class\": \"c\", \"nodes\": [[1]], \"edges\": []}\n"
               "{\"id\": \"b\", \"class\": \"c\", \"nodes\": [[1]], \n");
    try {
        read_split_jsonl(dir / "train.jsonl");
        FAIL() << "expected an error";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("train.jsonl:2:"), std::string::npos) << e.what();
    }
}

TEST(Jsonl, DimensionMismatch) {
    const auto dir = scratch("dim");
    write_text(dir / "train.jsonl",
               "{\"id\": \"a\", \"class\": \"c\", \"nodes\": [[1]], \"edges\": []}\n"
               "{\"id\": \"b\", \"class\": \"c\", \"nodes\": [[1, 2]], \"edges\": []}\n");
    EXPECT_THROW(read_split_jsonl(dir / "train.jsonl"), ValidationError);
}

TEST(Jsonl, DuplicateIds) {
    const auto dir = scratch("dup");
    write_text(dir / "train.jsonl",
               "{\"id\": \"a\", \"class\": \"c\", \"nodes\": [[1]], \"edges\": []}\n"
               "{\"id\": \"a\", \"class\": \"c\", \"nodes\": [[2]], \"edges\": []}\n");
    EXPECT_THROW(read_split_jsonl(dir / "train.jsonl"), ValidationError);
    // Across splits too.
    write_text(dir / "train.jsonl", "{\"id\": \"a\", \"class\": \"c\", \"nodes\": [[1]], \"edges\": []}\n");
    write_text(dir / "test.jsonl", "{\"id\": \"a\", \"class\": \"c\", \"nodes\": [[1]], \"edges\": []}\n");
    EXPECT_THROW(read_dataset(dir), ValidationError);
}

TEST(Jsonl, MissingFileIsIoError) {
    EXPECT_THROW(read_split_jsonl("/nonexistent/train.jsonl"), IoError);
    EXPECT_THROW(read_dataset("/nonexistent/dir"), IoError);
}

// ---- GXL / CXL -------------------------------------------------------------

TEST(Gxl, MinimalDocumentWithEdgeFlag) {
    const auto g = parse_gxl(kMinimalGxl, letter_config());
    EXPECT_EQ(g.order(), 2u);
    EXPECT_EQ(g.attr_dim(), 3u);
    EXPECT_EQ(g.nodes()[0], (Attr{0.5, 1.25, 0.0}));
    EXPECT_EQ(g.nodes()[1], (Attr{-2.0, 3.0, 0.0}));
    ASSERT_EQ(g.edges().size(), 1u);
    const auto e = g.edge(0, 1);
    ASSERT_TRUE(e.has_value());
    EXPECT_EQ(Attr(e->begin(), e->end()), (Attr{0.0, 0.0, 1.0}));
}

TEST(Gxl, FlagMatchesAttachEdgeFlag) {
    GxlAttrConfig c = letter_config();
    c.append_edge_flag = false;
    const std::string doc = gxl_with(node("a", 1, 2) + node("b", 3, 4));
    EXPECT_EQ(parse_gxl(doc, letter_config()), attach_edge_flag(parse_gxl(doc, c)));
}

TEST(Gxl, NoEdges) {
    const auto g = parse_gxl(gxl_with(node("a", 1, 2) + node("b", 3, 4) + node("c", 5, 6)), letter_config());
    EXPECT_EQ(g.order(), 3u);
    EXPECT_TRUE(g.edges().empty());
}

TEST(Gxl, EdgeToUnknownNode) {
    EXPECT_THROW(parse_gxl(gxl_with(node("a", 1, 2) + "<edge from=\"a\" to=\"zz\"/>"), letter_config()),
                 ValidationError);
}

TEST(Gxl, MissingAttribute) {
    const std::string doc = gxl_with("<node id=\"a\"><attr name=\"x\"><float>1</float></attr></node>");
    EXPECT_THROW(parse_gxl(doc, letter_config()), ValidationError);
}

TEST(Gxl, NonNumericValue) {
    const std::string doc = gxl_with(
        "<node id=\"a\"><attr name=\"x\"><float>abc</float></attr><attr name=\"y\"><float>1</float></attr></node>");
    EXPECT_THROW(parse_gxl(doc, letter_config()), ValidationError);
}

TEST(Gxl, UnknownAttributesAreIgnored) {
    const std::string doc = gxl_with(
        "<node id=\"a\"><attr name=\"x\"><float>1</float></attr><attr name=\"colour\"><string>red</string></attr>"
        "<attr name=\"y\"><float>2</float></attr></node>" +
        node("b", 0, 0) + "<edge from=\"a\" to=\"b\"><attr name=\"weight\"><float>7</float></attr></edge>");
    const auto g = parse_gxl(doc, letter_config());
    EXPECT_EQ(g.nodes()[0], (Attr{1.0, 2.0, 0.0}));
    EXPECT_EQ(g.edges().size(), 1u);
}

TEST(Gxl, EdgeAttributesAndDeduplication) {
    GxlAttrConfig c;
    c.node_attr_names = {"x"};
    c.edge_attr_names = {"w"};
    EXPECT_FALSE(c.edge_flag());
    const std::string doc = gxl_with(
        "<node id=\"a\"><attr name=\"x\"><float>1</float></attr></node>"
        "<node id=\"b\"><attr name=\"x\"><float>2</float></attr></node>"
        "<edge from=\"a\" to=\"b\"><attr name=\"w\"><float>0.5</float></attr></edge>"
        "<edge from=\"b\" to=\"a\"><attr name=\"w\"><float>9</float></attr></edge>");
    const auto g = parse_gxl(doc, c);
    EXPECT_EQ(g.attr_dim(), 2u);
    EXPECT_EQ(g.nodes()[1], (Attr{2.0, 0.0}));
    ASSERT_EQ(g.edges().size(), 1u);
    const auto e = g.edge(0, 1);
    EXPECT_EQ(Attr(e->begin(), e->end()), (Attr{0.0, 0.5}));
}

TEST(Gxl, ParseIsDeterministic) {
    for (const auto& entry : fs::directory_iterator(SUBLINEAR_SAMPLE_DIR)) {
        if (entry.path().extension() != ".gxl") continue;
        const auto doc = read_text_file(entry.path());
        EXPECT_EQ(parse_gxl(doc, letter_config()), parse_gxl(doc, letter_config()));
    }
}

TEST(Gxl, MalformedXml) { EXPECT_THROW(parse_gxl("<gxl><graph>", letter_config()), ValidationError); }

TEST(Cxl, SingleEntry) {
    const auto dir = scratch("cxl_one");
    write_text(dir / "g.gxl", kMinimalGxl);
    const auto recs =
        parse_cxl(R"(<GraphCollection><letters><print file="g.gxl" class="A"/></letters></GraphCollection>)", dir,
                  letter_config());
    ASSERT_EQ(recs.size(), 1u);
    EXPECT_EQ(recs[0].id, "g");
    EXPECT_EQ(recs[0].cls, "A");
    EXPECT_EQ(recs[0].graph.order(), 2u);
}

TEST(Cxl, ClassSetInListingOrder) {
    const auto dir = scratch("cxl_order");
    for (const char* f : {"a.gxl", "b.gxl", "c.gxl"}) write_text(dir / f, kMinimalGxl);
    write_text(dir / "train.cxl",
               R"(<GraphCollection><letters>
                    <print file="a.gxl" class="Z"/><print file="b.gxl" class="B"/><print file="c.gxl" class="Z"/>
                  </letters></GraphCollection>)");
    const auto ds = read_iam_dataset(dir, letter_config());
    EXPECT_EQ(ds.class_set, (std::vector<std::string>{"Z", "B"}));
    EXPECT_EQ(ds.attr_dim, 3u);
}

TEST(Cxl, MissingFileNamedInError) {
    const auto dir = scratch("cxl_missing");
    try {
        parse_cxl(R"(<GraphCollection><print file="ghost.gxl" class="A"/></GraphCollection>)", dir,
                  letter_config());
        FAIL() << "expected an error";
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find("ghost.gxl"), std::string::npos);
    }
}

TEST(Cxl, EmptyCollection) {
    EXPECT_THROW(parse_cxl("<GraphCollection></GraphCollection>", ".", letter_config()), ValidationError);
}

TEST(Presets, LoadAndReadSample) {
    const auto letter = GxlAttrConfig::load(fs::path(SUBLINEAR_PRESET_DIR) / "letter.json");
    EXPECT_EQ(letter.attr_dim(), 3u);
    const auto fp = GxlAttrConfig::load(fs::path(SUBLINEAR_PRESET_DIR) / "fingerprint.json");
    EXPECT_EQ(fp.attr_dim(), 5u);
    const auto ds = read_iam_dataset(SUBLINEAR_SAMPLE_DIR, letter);
    EXPECT_EQ(ds.split(kTrain).size(), 18u);
    EXPECT_EQ(ds.split(kValidation).size(), 9u);
    EXPECT_EQ(ds.split(kTest).size(), 9u);
    EXPECT_EQ(ds.class_set.size(), 3u);
    EXPECT_EQ(ds.provenance.at("source_format"), "gxl");
}

TEST(Standardize, TrainStatisticsAreZScored) {
    auto ds = read_iam_dataset(SUBLINEAR_SAMPLE_DIR, letter_config());
    standardize_node_attributes(ds);
    double sum = 0.0, sq = 0.0;
    std::size_t n = 0;
    for (const auto& r : ds.split(kTrain))
        for (const auto& a : r.graph.nodes()) {
            sum += a[0];
            sq += a[0] * a[0];
            ++n;
        }
    EXPECT_NEAR(sum / n, 0.0, 1e-12);
    EXPECT_NEAR(sq / n, 1.0, 1e-12);
    EXPECT_TRUE(ds.provenance.contains("standardized"));
}

// ---- Synthetic -------------------------------------------------------------

TEST(Synthetic, HugeMarginIsInfeasible) {
    SyntheticSpec spec;
    spec.n_train = 10;
    spec.n_validation = 0;
    spec.n_test = 0;
    spec.planted_margin = 1e6;
    EXPECT_THROW(generate_synthetic(spec), InfeasibleSpecError);
}

TEST(Synthetic, MarginCertificateHolds) {
    // Oracle: brute-force enumeration against the planted weight graph.
    SyntheticSpec spec;
    spec.n_train = 40;
    spec.n_validation = 10;
    spec.n_test = 10;
    spec.order_max = 5;
    spec.seed = 8;
    const auto syn = generate_synthetic(spec);
    const auto w = syn.planted.weight_graph();
    const double norm = std::sqrt(oracle::brute_force_sdp(w, w));
    double cert = INFINITY;
    for (const auto& [name, recs] : syn.dataset.splits)
        for (const auto& r : recs) {
            const int y = r.cls == "pos" ? 1 : -1;
            const double f = oracle::brute_force_sdp(w, r.graph) + syn.planted.bias();
            EXPECT_GE(y * f, spec.planted_margin * norm * (1 - 1e-9)) << r.id;
            cert = std::min(cert, y * f / norm);
        }
    EXPECT_GE(syn.margin_certificate, spec.planted_margin);
    EXPECT_NEAR(syn.margin_certificate, cert, 1e-9);
}

TEST(Synthetic, PlantedModelMakesNoErrors) {
    SyntheticSpec spec;
    spec.seed = 4;
    const auto syn = generate_synthetic(spec);
    for (const auto& [name, recs] : syn.dataset.splits) {
        EXPECT_FALSE(recs.empty());
        bool pos = false, neg = false;
        for (const auto& r : recs) {
            const int y = r.cls == "pos" ? 1 : -1;
            EXPECT_EQ(classify(syn.planted, r.graph), y);
            (y > 0 ? pos : neg) = true;
        }
        EXPECT_TRUE(pos && neg) << name;
    }
    EXPECT_EQ(syn.dataset.split(kTrain).size(), spec.n_train);
    EXPECT_EQ(syn.dataset.provenance.at("seed"), spec.seed);
}

TEST(Synthetic, SeedDeterminesOutput) {
    SyntheticSpec spec;
    spec.n_train = 15;
    spec.seed = 77;
    const auto a = generate_synthetic(spec), b = generate_synthetic(spec);
    EXPECT_EQ(a.dataset.splits, b.dataset.splits);
    spec.seed = 78;
    EXPECT_NE(generate_synthetic(spec).dataset.splits, a.dataset.splits);
}

TEST(Synthetic, LabelNoiseOnlyTouchesTrainingSplits) {
    SyntheticSpec spec;
    spec.label_noise = 0.3;
    spec.seed = 10;
    const auto syn = generate_synthetic(spec);
    std::size_t flipped = 0;
    for (const auto& r : syn.dataset.split(kTrain))
        if (classify(syn.planted, r.graph) != (r.cls == "pos" ? 1 : -1)) ++flipped;
    EXPECT_GT(flipped, 0u);
    for (const auto& r : syn.dataset.split(kTest))
        EXPECT_EQ(classify(syn.planted, r.graph), r.cls == "pos" ? 1 : -1);
}

TEST(Synthetic, SpecJsonRoundTripAndValidation) {
    SyntheticSpec spec;
    spec.planted_margin = 0.25;
    spec.seed = 12;
    const auto back = SyntheticSpec::from_json(spec.to_json());
    EXPECT_EQ(back.to_json(), spec.to_json());
    SyntheticSpec bad;
    bad.order_min = 5;
    bad.order_max = 3;
    EXPECT_THROW(bad.validate(), ValidationError);
    bad = SyntheticSpec{};
    bad.planted_margin = 0.0;
    EXPECT_THROW(bad.validate(), ValidationError);
    bad = SyntheticSpec{};
    bad.order_max = 9;
    EXPECT_THROW(bad.validate(), ValidationError);
}
