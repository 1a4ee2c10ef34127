pub mod basin;
pub mod blowup;
pub mod charts;
pub mod cohomology;
pub mod degrees;
pub mod pentagon;
pub mod poly;
pub mod report;
