#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "fraudlab/error.hpp"
#include "fraudlab/txdata.hpp"

using namespace fraudlab;

namespace {

const std::string kHeader =
    "step,type,amount,nameOrig,oldbalanceOrg,newbalanceOrig,nameDest,"
    "oldbalanceDest,newbalanceDest,isFraud,isFlaggedFraud\n";

Transaction tx(TxType type, double amount, std::uint8_t fraud, std::string dest = "M1") {
  Transaction t;
  t.step = 1;
  t.tx_type = type;
  t.amount = amount;
  t.orig_id = "C1";
  t.dest_id = std::move(dest);
  t.is_fraud = fraud;
  return t;
}

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return Errc::kFit;
}

}  // namespace

TEST(ParseCsv, CanonicalRow) {
  const auto ds = parse_csv(kHeader +
      "1,PAYMENT,9839.64,C1231006815,170136.0,160296.36,M1979787155,0.0,0.0,0,0\n");
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds[0].tx_type, TxType::kPayment);
  EXPECT_EQ(ds[0].amount, 9839.64);
  EXPECT_EQ(ds[0].old_balance_orig, 170136.0);
  EXPECT_EQ(ds[0].new_balance_orig, 160296.36);
  EXPECT_EQ(ds[0].orig_id, "C1231006815");
  EXPECT_EQ(ds[0].dest_id, "M1979787155");
  EXPECT_EQ(ds[0].is_fraud, 0);
}

TEST(ParseCsv, HeaderOnlyIsEmpty) { EXPECT_TRUE(parse_csv(kHeader).empty()); }

TEST(ParseCsv, MissingLabelColumnIsSchemaError) {
  const std::string header =
      "step,type,amount,nameOrig,oldbalanceOrg,newbalanceOrig,nameDest,"
      "oldbalanceDest,newbalanceDest,isFlaggedFraud\n";
  EXPECT_EQ(code_of([&] { parse_csv(header); }), Errc::kSchema);
  try {
    parse_csv(header);
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("isFraud"), std::string::npos);
  }
}

TEST(ParseCsv, BadRowsAreRowErrors) {
  EXPECT_EQ(code_of([&] { parse_csv(kHeader + "1,BOGUS,1,C,0,0,M,0,0,0,0\n"); }), Errc::kRow);
  EXPECT_EQ(code_of([&] { parse_csv(kHeader + "1,PAYMENT,-5,C,0,0,M,0,0,0,0\n"); }), Errc::kRow);
  EXPECT_EQ(code_of([&] { parse_csv(kHeader + "1,PAYMENT,abc,C,0,0,M,0,0,0,0\n"); }), Errc::kRow);
  EXPECT_EQ(code_of([&] { parse_csv(kHeader + "1,PAYMENT,1,C,0,0,M,0,0,2,0\n"); }), Errc::kRow);
  EXPECT_EQ(code_of([&] { parse_csv(kHeader + "1,PAYMENT,1,C,0,0\n"); }), Errc::kRow);
}

TEST(ParseCsv, ColumnOrderFollowsHeader) {
  const std::string text =
      "isFraud,isFlaggedFraud,step,type,amount,nameOrig,oldbalanceOrg,"
      "newbalanceOrig,nameDest,oldbalanceDest,newbalanceDest\n"
      "1,0,7,TRANSFER,250.5,C9,250.5,0,C77,0,0\n";
  const auto ds = parse_csv(text);
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds[0].step, 7);
  EXPECT_EQ(ds[0].tx_type, TxType::kTransfer);
  EXPECT_EQ(ds[0].is_fraud, 1);
}

TEST(LoadCsv, MissingFileIsIoError) {
  EXPECT_EQ(code_of([] { load_csv("/nonexistent/nowhere.csv"); }), Errc::kIo);
}

TEST(WriteCsv, EmptyDatasetIsHeaderOnly) {
  EXPECT_EQ(to_csv(Dataset{}), kHeader);
}

TEST(WriteCsv, ZeroAmountReparsesAsZero) {
  const Dataset ds({tx(TxType::kDebit, 0.0, 0)});
  const auto back = parse_csv(to_csv(ds));
  EXPECT_EQ(back[0].amount, 0.0);
  EXPECT_FALSE(std::signbit(back[0].amount));
}

TEST(WriteCsv, GeneratedDatasetRoundTripsThroughFile) {
  GeneratorConfig cfg;
  cfg.n_rows = 5000;
  cfg.fraud_rate = 0.01;
  const auto ds = generate(cfg);
  const auto path = std::filesystem::temp_directory_path() / "fraudlab_roundtrip.csv";
  write_csv(ds, path);
  const auto back = load_csv(path);
  std::filesystem::remove(path);
  EXPECT_EQ(back, ds);
}

TEST(FormatDecimal, ShortestExactText) {
  EXPECT_EQ(format_decimal(9839.64), "9839.64");
  EXPECT_EQ(format_decimal(0.1 + 0.2), "0.30000000000000004");
  EXPECT_EQ(std::stod(format_decimal(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Generate, FraudCountAndTypesAtPaySimPrevalence) {
  GeneratorConfig cfg;  // 100000 rows at 0.00129
  const auto ds = generate(cfg);
  ASSERT_EQ(ds.size(), 100000u);
  std::int64_t fraud = 0;
  for (const auto& t : ds.rows()) {
    if (!t.is_fraud) continue;
    ++fraud;
    EXPECT_TRUE(t.tx_type == TxType::kTransfer || t.tx_type == TxType::kCashOut);
  }
  EXPECT_EQ(fraud, 129);
  const auto c = class_distribution(ds);
  EXPECT_EQ(c.legit, 99871);
  EXPECT_EQ(c.fraud, 129);
  EXPECT_DOUBLE_EQ(c.fraud_rate, 0.00129);
}

TEST(Generate, TwoFraudRowsArePairedTransferAndCashOut) {
  GeneratorConfig cfg;
  cfg.n_rows = 1000;
  cfg.fraud_rate = 0.002;
  const auto ds = generate(cfg);
  int transfers = 0;
  int cash_outs = 0;
  for (const auto& t : ds.rows()) {
    if (!t.is_fraud) continue;
    transfers += t.tx_type == TxType::kTransfer;
    cash_outs += t.tx_type == TxType::kCashOut;
  }
  EXPECT_EQ(transfers, 1);
  EXPECT_EQ(cash_outs, 1);
}

TEST(Generate, SameSeedSameBytesDifferentSeedDiffers) {
  GeneratorConfig cfg;
  cfg.n_rows = 3000;
  const auto a = to_csv(generate(cfg));
  EXPECT_EQ(a, to_csv(generate(cfg)));
  cfg.seed = 43;
  EXPECT_NE(a, to_csv(generate(cfg)));
}

TEST(Generate, InvalidConfigRejected) {
  GeneratorConfig cfg;
  cfg.fraud_rate = 1.5;
  EXPECT_EQ(code_of([&] { generate(cfg); }), Errc::kConfig);
  cfg = {};
  cfg.n_rows = 0;
  EXPECT_EQ(code_of([&] { generate(cfg); }), Errc::kConfig);
}

TEST(ClassDistribution, AllNegative) {
  std::vector<Transaction> rows(10, tx(TxType::kPayment, 1.0, 0));
  const auto c = class_distribution(Dataset(rows));
  EXPECT_EQ(c.legit, 10);
  EXPECT_EQ(c.fraud, 0);
  EXPECT_EQ(c.fraud_rate, 0.0);
}

TEST(ClassDistribution, EmptyRateIsUndefined) {
  EXPECT_EQ(code_of([] { class_distribution(Dataset{}); }), Errc::kUndefinedRate);
}

TEST(FraudShare, SingleTransferFraud) {
  const Dataset ds({tx(TxType::kTransfer, 5, 1), tx(TxType::kPayment, 5, 0)});
  const auto table = fraud_share_by_type(ds);
  EXPECT_EQ(table.at(TxType::kTransfer).share_of_fraud, 1.0);
  EXPECT_EQ(table.at(TxType::kPayment).share_of_fraud, 0.0);
}

TEST(FraudShare, GeneratedDataHasNoFraudOutsideTransferCashOut) {
  GeneratorConfig cfg;
  cfg.n_rows = 20000;
  cfg.fraud_rate = 0.01;
  const auto table = fraud_share_by_type(generate(cfg));
  for (auto type : {TxType::kCashIn, TxType::kDebit, TxType::kPayment}) {
    EXPECT_EQ(table.count(type) ? table.at(type).fraud : 0, 0);
  }
  EXPECT_NEAR(table.at(TxType::kTransfer).share_of_fraud +
                  table.at(TxType::kCashOut).share_of_fraud,
              1.0, 1e-12);
}

TEST(Correlation, HandComputedPearson) {
  std::vector<Transaction> rows;
  const double amounts[] = {1, 2, 3, 4};
  const std::uint8_t labels[] = {0, 0, 1, 1};
  for (int i = 0; i < 4; ++i) rows.push_back(tx(TxType::kPayment, amounts[i], labels[i]));
  const auto m = correlation_matrix(Dataset(rows));
  // 2 / sqrt(5)
  EXPECT_NEAR(m[1][6], 0.8944, 1e-4);
  EXPECT_NEAR(m[1][6], 0.894427190999916, 1e-12);
  EXPECT_EQ(m[1][6], m[6][1]);
  EXPECT_EQ(m[1][1], 1.0);
  // type is constant here
  EXPECT_EQ(m[0][6], 0.0);
}

TEST(Correlation, ConstantLabelGivesZeroSentinel) {
  std::vector<Transaction> rows;
  for (int i = 0; i < 5; ++i) rows.push_back(tx(TxType::kPayment, i + 1.0, 0));
  const auto m = correlation_matrix(Dataset(rows));
  for (std::size_t j = 0; j + 1 < kCorrelationDim; ++j) EXPECT_EQ(m[j][6], 0.0);
}

TEST(Correlation, GeneratedAmountCorrelatesWithFraud) {
  GeneratorConfig cfg;
  cfg.n_rows = 50000;
  const auto m = correlation_matrix(generate(cfg));
  EXPECT_GT(m[1][6], 0.0);
}

TEST(TopDestinations, CountsAndTruncation) {
  const Dataset ds({tx(TxType::kTransfer, 1, 1, "D1"), tx(TxType::kTransfer, 1, 1, "D2"),
                    tx(TxType::kTransfer, 1, 1, "D1"), tx(TxType::kPayment, 1, 0, "D3")});
  const auto top = top_fraud_destinations(ds, 10);
  ASSERT_EQ(top.size(), 2u);
  EXPECT_EQ(top[0], DestCount("D1", 2));
  EXPECT_EQ(top[1], DestCount("D2", 1));
  const auto one = top_fraud_destinations(ds, 1);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0], DestCount("D1", 2));
  EXPECT_TRUE(top_fraud_destinations(Dataset({tx(TxType::kPayment, 1, 0)}), 5).empty());
}

TEST(RenderEda, AllLegitVerdictsNotEvaluable) {
  std::vector<Transaction> rows(10, tx(TxType::kPayment, 1.0, 0));
  const auto text = render_eda(summarize(Dataset(rows)));
  EXPECT_NE(text.find("H1 amount-fraud correlation: not evaluable"), std::string::npos);
  EXPECT_NE(text.find("H2 fraud only in TRANSFER/CASH_OUT: not evaluable"), std::string::npos);
}

TEST(RenderEda, GeneratedDataSupportsH2) {
  GeneratorConfig cfg;
  cfg.n_rows = 20000;
  cfg.fraud_rate = 0.01;
  const auto summary = summarize(generate(cfg));
  const auto text = render_eda(summary);
  EXPECT_NE(text.find("H2 fraud only in TRANSFER/CASH_OUT: supported"), std::string::npos) << text;
  const auto j = to_json(summary);
  EXPECT_EQ(j.at("class_counts").at("fraud").get<std::int64_t>(), summary.fraud_count);
}
