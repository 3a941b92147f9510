#pragma once

#include <array>
#include <string_view>

namespace botweave {

struct City {
  std::string_view name;
  double lat;
  double lon;
  double weight;  // relative share of geotagged activity
};

/// Home locations for geotagging real users. Weights follow metro population,
/// rescaled so roughly 45% of activity falls in North America, 30% in Europe
/// and North Africa, and 25% elsewhere.
inline constexpr auto kCities = std::to_array<City>({
    {"New York", 40.71, -74.01, 56.10},
    {"Los Angeles", 34.05, -118.24, 38.39},
    {"Chicago", 41.88, -87.63, 28.05},
    {"Houston", 29.76, -95.37, 20.67},
    {"Phoenix", 33.45, -112.07, 14.47},
    {"Philadelphia", 39.95, -75.17, 18.31},
    {"San Antonio", 29.42, -98.49, 7.68},
    {"San Diego", 32.72, -117.16, 9.74},
    {"Dallas", 32.78, -96.80, 22.44},
    {"Atlanta", 33.75, -84.39, 17.72},
    {"Miami", 25.76, -80.19, 18.01},
    {"Seattle", 47.61, -122.33, 11.81},
    {"Denver", 39.74, -104.99, 8.56},
    {"Boston", 42.36, -71.06, 14.47},
    {"Washington", 38.91, -77.04, 18.60},
    {"Detroit", 42.33, -83.05, 12.70},
    {"Minneapolis", 44.98, -93.27, 10.93},
    {"Toronto", 43.65, -79.38, 18.31},
    {"Montreal", 45.50, -73.57, 12.70},
    {"Vancouver", 49.28, -123.12, 7.68},
    {"Monterrey", 25.69, -100.32, 13.88},
    {"Las Vegas", 36.17, -115.14, 6.79},
    {"St. Louis", 38.63, -90.20, 8.27},
    {"Nashville", 36.16, -86.78, 5.91},
    {"Portland", 45.52, -122.68, 7.38},
    {"Salt Lake City", 40.76, -111.89, 3.84},
    {"Kansas City", 39.10, -94.58, 6.50},
    {"Charlotte", 35.23, -80.84, 7.97},
    {"Orlando", 28.54, -81.38, 7.97},
    {"New Orleans", 29.95, -90.07, 3.84},
    {"Tijuana", 32.51, -117.04, 6.20},
    {"Ottawa", 45.42, -75.70, 4.13},
    {"London", 51.51, -0.13, 34.26},
    {"Paris", 48.86, 2.35, 29.36},
    {"Madrid", 40.42, -3.70, 16.39},
    {"Barcelona", 41.39, 2.17, 13.70},
    {"Berlin", 52.52, 13.40, 14.93},
    {"Rome", 41.90, 12.50, 10.52},
    {"Milan", 45.46, 9.19, 10.52},
    {"Amsterdam", 52.37, 4.90, 6.12},
    {"Brussels", 50.85, 4.35, 5.14},
    {"Munich", 48.14, 11.58, 7.10},
    {"Vienna", 48.21, 16.37, 7.10},
    {"Warsaw", 52.23, 21.01, 7.59},
    {"Lisbon", 38.72, -9.14, 7.10},
    {"Dublin", 53.35, -6.26, 3.43},
    {"Manchester", 53.48, -2.24, 6.85},
    {"Istanbul", 41.01, 28.98, 36.70},
    {"Athens", 37.98, 23.73, 9.05},
    {"Stockholm", 59.33, 18.07, 5.87},
    {"Oslo", 59.91, 10.75, 2.45},
    {"Copenhagen", 55.68, 12.57, 4.89},
    {"Prague", 50.08, 14.44, 6.61},
    {"Budapest", 47.50, 19.04, 7.34},
    {"Bucharest", 44.43, 26.10, 5.63},
    {"Kyiv", 50.45, 30.52, 8.56},
    {"Algiers", 36.75, 3.06, 8.32},
    {"Tunis", 36.81, 10.18, 6.61},
    {"Hamburg", 53.55, 9.99, 7.83},
    {"Glasgow", 55.86, -4.25, 4.40},
    {"Lyon", 45.76, 4.84, 5.63},
    {"Tokyo", 35.68, 139.69, 28.84},
    {"Jakarta", -6.21, 106.85, 23.39},
    {"Sao Paulo", -23.55, -46.63, 17.15},
    {"Mexico City", 19.43, -99.13, 16.37},
    {"Manila", 14.60, 120.98, 18.71},
    {"Buenos Aires", -34.60, -58.38, 11.69},
    {"Lagos", 6.52, 3.38, 10.91},
    {"Sydney", -33.87, 151.21, 3.90},
    {"Mumbai", 19.08, 72.88, 15.59},
    {"Riyadh", 24.71, 46.68, 5.46},
    {"Cairo", 30.04, 31.24, 15.59},
    {"Johannesburg", -26.20, 28.05, 4.68},
    {"Bogota", 4.71, -74.07, 8.57},
    {"Santiago", -33.45, -70.67, 5.46},
    {"Moscow", 55.76, 37.62, 9.35},
    {"Seoul", 37.57, 126.98, 19.49},
    {"Bangkok", 13.76, 100.50, 7.80},
    {"Kuala Lumpur", 3.14, 101.69, 6.24},
    {"Singapore", 1.35, 103.82, 4.44},
    {"Dubai", 25.20, 55.27, 2.57},
    {"Caracas", 10.48, -66.90, 2.34},
    {"Lima", -12.05, -77.04, 7.80},
    {"Nairobi", -1.29, 36.82, 3.66},
});

}  // namespace botweave
