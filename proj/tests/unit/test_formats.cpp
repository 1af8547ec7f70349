#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <regex>

#include "pmtnet/binary_io.hpp"
#include "pmtnet/errors.hpp"
#include "pmtnet/formats.hpp"
#include "pmtnet/svg.hpp"
#include "pmtnet/synth.hpp"

using namespace pmtnet;

namespace {

Dataset small_dataset() {
  SynthConfig cfg;
  cfg.counts = {3, 3, 3, 3, 3};
  return generate_dataset(cfg);
}

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

Embedding random_embedding(std::size_t n, Prng& prng) {
  Embedding e{n, 2, {}};
  for (std::size_t i = 0; i < 2 * n; ++i) e.coords.push_back(prng.normal() * 10.0);
  return e;
}

}  // namespace

TEST(DatasetFile, HexLayout) {
  Dataset d;
  d.grids.resize(2);
  d.labels = {EventLabel::IBDDelay, EventLabel::Other};
  d.grids[0].q[0] = 1.0;
  d.grids[1].q[191] = 2.5;
  const auto b = serialize_dataset(d);
  ASSERT_EQ(b.size(), kDatasetHeaderBytes + 2 * kDatasetRecordBytes);
  EXPECT_EQ(b.size(), 10u + 769u * 2u);
  const std::vector<std::uint8_t> header{'D', 'Y', 'B', 'S', 1, 0, 2, 0, 0, 0};
  EXPECT_EQ(std::vector<std::uint8_t>(b.begin(), b.begin() + 10), header);
  EXPECT_EQ(b[10], 3);  // first label
  // 1.0f = 0x3f800000, little-endian
  EXPECT_EQ(std::vector<std::uint8_t>(b.begin() + 11, b.begin() + 15), (std::vector<std::uint8_t>{0, 0, 0x80, 0x3f}));
  EXPECT_EQ(b[10 + 769], 4);  // second label
  // 2.5f = 0x40200000 in the last four bytes
  EXPECT_EQ(std::vector<std::uint8_t>(b.end() - 4, b.end()), (std::vector<std::uint8_t>{0, 0, 0x20, 0x40}));
}

TEST(DatasetFile, RoundTripBitExact) {
  const Dataset d = small_dataset();
  const auto bytes = serialize_dataset(d);
  const Dataset back = deserialize_dataset(bytes);
  EXPECT_EQ(serialize_dataset(back), bytes);
  EXPECT_EQ(back.labels, d.labels);
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t p = 0; p < kPmts; ++p) EXPECT_EQ(back.grids[i].q[p], static_cast<double>(static_cast<float>(d.grids[i].q[p])));
}

TEST(DatasetFile, CorruptInputs) {
  const auto good = serialize_dataset(small_dataset());
  auto magic = good;
  magic[1] = 'Z';
  EXPECT_THROW(deserialize_dataset(magic), FormatError);
  auto version = good;
  version[4] = 7;
  EXPECT_THROW(deserialize_dataset(version), FormatError);
  auto cut = good;
  cut.pop_back();
  EXPECT_THROW(deserialize_dataset(cut), FormatError);
  auto label = good;
  label[10] = 9;
  EXPECT_THROW(deserialize_dataset(label), FormatError);
  auto negative = good;
  const float neg = -1.0f;
  std::memcpy(&negative[11], &neg, 4);
  EXPECT_THROW(deserialize_dataset(negative), FormatError);
  EXPECT_THROW(deserialize_dataset(std::vector<std::uint8_t>{}), FormatError);
}

TEST(DatasetFile, DiskRoundTripAndMissingFile) {
  const auto dir = std::filesystem::temp_directory_path() / "pmtnet_formats_test";
  std::filesystem::create_directories(dir);
  const Dataset d = small_dataset();
  save_dataset(d, dir / "a.dybs");
  EXPECT_EQ(read_file_bytes(dir / "a.dybs"), serialize_dataset(d));
  EXPECT_THROW(load_dataset(dir / "missing.dybs"), IoError);
  EXPECT_THROW(save_dataset(d, dir / "no_such_dir" / "x.dybs"), IoError);
  std::filesystem::remove_all(dir);
}

TEST(Csv, RoundTripIsExact) {
  Prng prng(1);
  LabeledRows t;
  t.columns = {"f0", "f1", "f2"};
  for (int i = 0; i < 20; ++i) {
    t.rows.push_back({prng.normal(), prng.uniform() * 1e-300, -prng.uniform() * 1e300});
    t.labels.push_back(kAllLabels[i % 5]);
  }
  const std::string text = format_labeled_csv(t);
  const LabeledRows back = parse_labeled_csv(text);
  EXPECT_EQ(back.rows, t.rows);
  EXPECT_EQ(back.labels, t.labels);
  EXPECT_EQ(back.columns, t.columns);
  EXPECT_EQ(format_labeled_csv(back), text);
}

TEST(Csv, HeaderAndWidth) {
  const std::vector<std::vector<double>> f(3, std::vector<double>(26, 0.5));
  const std::vector<EventLabel> l{EventLabel::Muon, EventLabel::Other, EventLabel::Flasher};
  const std::string text = format_labeled_csv(feature_rows(f, l));
  const std::string header = text.substr(0, text.find('\n'));
  EXPECT_EQ(count(header, ",") + 1, 27u);
  EXPECT_EQ(header.substr(0, 6), "f0,f1,");
  EXPECT_EQ(header.substr(header.size() - 6), ",label");
  EXPECT_NE(text.find(",4\n"), std::string::npos);
}

TEST(Csv, Malformed) {
  EXPECT_THROW(parse_labeled_csv(""), FormatError);
  EXPECT_THROW(parse_labeled_csv("x,y\n1,2\n"), FormatError);
  EXPECT_THROW(parse_labeled_csv("x,label\n1\n"), FormatError);
  EXPECT_THROW(parse_labeled_csv("x,label\nabc,1\n"), FormatError);
  EXPECT_THROW(parse_labeled_csv("x,label\n1,7\n"), FormatError);
}

TEST(Svg, ScatterSchema) {
  Prng prng(2);
  const Embedding e = random_embedding(40, prng);
  std::vector<EventLabel> l;
  for (int i = 0; i < 40; ++i) l.push_back(kAllLabels[i % 5]);
  const std::string svg = render_scatter_svg(e, l, "features <test>");
  EXPECT_EQ(count(svg, "<circle"), 40u);
  EXPECT_EQ(count(svg, "<rect"), 1u + kNumClasses);  // background + legend
  for (EventLabel c : kAllLabels) EXPECT_NE(svg.find(class_color(c)), std::string::npos);
  EXPECT_NE(svg.find("&lt;test&gt;"), std::string::npos);
  EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  // every opened element is closed
  EXPECT_EQ(count(svg, "<svg"), count(svg, "</svg>"));
  EXPECT_EQ(count(svg, "<text"), count(svg, "</text>"));
}

TEST(Svg, ScatterRoundTripThroughCsv) {
  Prng prng(3);
  const Embedding e = random_embedding(25, prng);
  std::vector<EventLabel> l(25, EventLabel::IBDPrompt);
  const std::string csv = format_labeled_csv(embedding_rows(e, l));
  const LabeledRows back = parse_labeled_csv(csv);
  Embedding e2{back.rows.size(), 2, {}};
  for (const auto& r : back.rows) e2.coords.insert(e2.coords.end(), r.begin(), r.end());
  EXPECT_EQ(format_labeled_csv(embedding_rows(e2, back.labels)), csv);
  EXPECT_EQ(render_scatter_svg(e2, back.labels, "t"), render_scatter_svg(e, l, "t"));
}

TEST(Svg, ReconstructionCells) {
  ReconstructionPanel p;
  p.input.values.fill(0.25);
  p.reconstruction.values.fill(2.0);  // clamped to the top of the scale
  const std::vector<ReconstructionPanel> panels{p, p};
  const std::string svg = render_reconstruction_svg(panels);
  EXPECT_EQ(count(svg, "<rect class=\"cell\""), 2u * 2u * kPmts);
  EXPECT_NE(svg.find("#fde725"), std::string::npos);
}
