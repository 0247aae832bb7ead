#include <gtest/gtest.h>

#include <plbif/atom_cloud.hpp>
#include <plbif/field.hpp>
#include <plbif/parallel.hpp>

#include <numeric>
#include <sstream>

using namespace plbif;

TEST(Parallel, RethrowsLowestFailingIndex) {
  try {
    parallel_for(100, [](std::size_t i) {
      if (i == 17 || i == 60) throw std::runtime_error(std::to_string(i));
    });
    FAIL() << "no exception";
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "17");
  }
}

TEST(Parallel, PairwiseSumIsThreadIndependent) {
  std::vector<double> v(10007);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 / (1.0 + static_cast<double>(i));
  const double before = pairwise_sum(v.data(), v.size());
  const int saved = thread_count();
  set_thread_count(3);
  EXPECT_EQ(pairwise_sum(v.data(), v.size()), before);
  set_thread_count(saved);
  EXPECT_NEAR(before, std::accumulate(v.begin(), v.end(), 0.0), 1e-12);
  EXPECT_EQ(pairwise_sum(v.data(), 0), 0.0);
}

TEST(Grid, ParseAndIndexing) {
  const GridSpec g = GridSpec::parse("-2,1,-1.5,1.5,7,5");
  EXPECT_EQ(g.size(), 35u);
  EXPECT_EQ(g.m(), 1);
  EXPECT_DOUBLE_EQ(g.spacing(0), 0.5);
  EXPECT_DOUBLE_EQ(g.spacing(1), 0.75);
  EXPECT_EQ(g.param(0)[0], Complex(-2.0, -1.5));
  EXPECT_EQ(g.param(34)[0], Complex(1.0, 1.5));
  const auto idx = g.unravel(9);
  EXPECT_EQ(idx[0], 2);
  EXPECT_EQ(idx[1], 1);
  EXPECT_EQ(g.ravel(idx), 9u);
  EXPECT_EQ(GridSpec::parse("0,1,0,1,3").size(), 9u);
  EXPECT_THROW((void)GridSpec::parse("0,1,0"), ValidationError);
}

TEST(AtomCloudIo, CsvRoundTrip) {
  AtomCloud c(2);
  c.add(Point{Complex(0.1, 0.2), Complex(-1.0 / 3.0, 2.0)}, 0.25);
  c.add(Point{Complex(1e-17, -0.0), Complex(3.5, 1e300)}, 0.75);
  std::stringstream ss;
  c.write_csv(ss);
  EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')), "re_1,im_1,re_2,im_2,weight");
  const AtomCloud back = AtomCloud::read_csv(ss);
  EXPECT_EQ(back.points(), c.points());
  EXPECT_EQ(back.weights(), c.weights());
  EXPECT_NO_THROW(c.validate());
  AtomCloud bad(1);
  bad.add(Point{0.0}, 0.5);
  EXPECT_THROW(bad.validate(), ValidationError);
}
