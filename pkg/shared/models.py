"""
Модели базы данных
"""
from sqlalchemy import Column, DateTime, Float, Integer, String
from sqlalchemy.sql import func

from shared.database import Base
from shared.schemas import BenchRecord


class BenchRecordRow(Base):
    __tablename__ = "bench_records"

    id = Column(Integer, primary_key=True, index=True)
    method = Column(String(8), index=True, nullable=False)  # fp, adm, ladm
    m = Column(Integer, nullable=False)
    sigma = Column(Float, nullable=False)
    replicate = Column(Integer, nullable=False)

    # пустые значения у сбойных записей
    rho_raw = Column(Float)
    rho_post = Column(Float)
    iterations = Column(Integer)
    wall_seconds = Column(Float)
    feasibility_violation = Column(Float)

    termination = Column(String(32), nullable=False)
    created_at = Column(DateTime(timezone=True), server_default=func.now())

    @classmethod
    def from_record(cls, record: BenchRecord) -> "BenchRecordRow":
        return cls(**record.model_dump(mode="json"))

    def to_record(self) -> BenchRecord:
        return BenchRecord(
            method=self.method,
            m=self.m,
            sigma=self.sigma,
            replicate=self.replicate,
            rho_raw=self.rho_raw,
            rho_post=self.rho_post,
            iterations=self.iterations,
            wall_seconds=self.wall_seconds,
            feasibility_violation=self.feasibility_violation,
            termination=self.termination,
        )
