//! Dense row-major 2-D storage shared by images, depth maps, and masks.

use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Clone> Grid<T> {
    pub fn filled(width: usize, height: usize, value: T) -> Self {
        Grid {
            width,
            height,
            data: alloc::vec![value; width * height],
        }
    }
}

impl<T> Grid<T> {
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Grid {
            width,
            height,
            data,
        }
    }

    /// Wraps an existing row-major buffer; panics when the length mismatches.
    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), width * height, "grid buffer length mismatch");
        Grid {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn same_size<U>(&self, other: &Grid<U>) -> bool {
        self.width == other.width && self.height == other.height
    }

    #[inline]
    pub fn contains(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height
    }

    #[inline]
    pub fn idx(&self, x: usize, y: usize) -> usize {
        debug_assert!(x < self.width && y < self.height);
        y * self.width + x
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> &T {
        &self.data[self.idx(x, y)]
    }

    #[inline]
    pub fn at_mut(&mut self, x: usize, y: usize) -> &mut T {
        let i = self.idx(x, y);
        &mut self.data[i]
    }

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    /// Row-major iteration as `(x, y, &value)`.
    pub fn enumerate(&self) -> impl Iterator<Item = (usize, usize, &T)> {
        let w = self.width;
        self.data
            .iter()
            .enumerate()
            .map(move |(i, v)| (i % w, i / w, v))
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> Grid<U> {
        Grid {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|v| f(v)).collect(),
        }
    }

    /// Mirrors the grid around its vertical axis.
    pub fn flip_horizontal(&self) -> Grid<T>
    where
        T: Clone,
    {
        Grid::from_fn(self.width, self.height, |x, y| {
            self.at(self.width - 1 - x, y).clone()
        })
    }
}

impl Grid<u8> {
    /// Sample with coordinates clamped to the image bounds.
    #[inline]
    pub fn at_clamped(&self, x: i64, y: i64) -> u8 {
        let xc = x.clamp(0, self.width as i64 - 1) as usize;
        let yc = y.clamp(0, self.height as i64 - 1) as usize;
        *self.at(xc, yc)
    }
}

impl Grid<f64> {
    /// True when the pixel holds a usable (strictly positive) value.
    #[inline]
    pub fn is_valid(&self, x: usize, y: usize) -> bool {
        *self.at(x, y) > 0.0
    }

    pub fn count_valid(&self) -> usize {
        self.data.iter().filter(|v| **v > 0.0).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_indexing() {
        let g = Grid::from_fn(4, 3, |x, y| (10 * y + x) as u8);
        assert_eq!(*g.at(2, 1), 12);
        assert_eq!(g.data()[g.idx(2, 1)], 12);
        assert_eq!(g.enumerate().count(), 12);
        let (x, y, v) = g.enumerate().nth(6).unwrap();
        assert_eq!((x, y, *v), (2, 1, 12));
    }

    #[test]
    fn flip_horizontal_mirrors() {
        let g = Grid::from_fn(3, 2, |x, y| (y * 3 + x) as u8);
        let f = g.flip_horizontal();
        assert_eq!(*f.at(0, 0), 2);
        assert_eq!(*f.at(2, 0), 0);
        assert_eq!(*f.at(1, 1), 4);
    }

    #[test]
    fn clamped_sampling() {
        let g = Grid::from_fn(2, 2, |x, y| (y * 2 + x) as u8);
        assert_eq!(g.at_clamped(-5, 0), 0);
        assert_eq!(g.at_clamped(5, 5), 3);
    }
}
